"""Task definition: scene, rewards, observables and episode logic."""

import abc

import numpy as np

from ctrlforge import errors
from ctrlforge.rl import specs


class Task(abc.ABC):
  """Combines an entity tree with reward, termination and action plumbing.

  Subclasses must provide `root_entity` (the arena) and `get_reward`.
  `control_timestep` defaults to one physics step and must remain an exact
  integer multiple of the physics timestep.
  """

  @property
  @abc.abstractmethod
  def root_entity(self):
    raise NotImplementedError

  @property
  def task_observables(self):
    return {}

  # -- timing ------------------------------------------------------------------

  @property
  def physics_timestep(self):
    return float(self.root_entity.mjcf_model.option.timestep)

  @property
  def control_timestep(self):
    return getattr(self, '_control_timestep', self.physics_timestep)

  @control_timestep.setter
  def control_timestep(self, value):
    self._control_timestep = float(value)

  @property
  def substeps_per_step(self):
    ratio = self.control_timestep / self.physics_timestep
    n_sub = int(round(ratio))
    if n_sub < 1 or abs(ratio - n_sub) > 1e-6:
      raise errors.Error(
          f'control_timestep ({self.control_timestep}) must be a positive '
          f'integer multiple of the physics timestep '
          f'({self.physics_timestep})')
    return n_sub

  # -- action plumbing -----------------------------------------------------------

  def action_spec(self, physics):
    """Bounds from the actuators' ctrl ranges; unbounded when none set."""
    model = physics.model
    if not model.act_ctrllimited.any():
      return specs.ArraySpec(shape=(model.nu,), name='action')
    minimum = np.where(model.act_ctrllimited, model.act_ctrlrange[:, 0],
                       -np.inf)
    maximum = np.where(model.act_ctrllimited, model.act_ctrlrange[:, 1],
                       np.inf)
    return specs.ArraySpec(shape=(model.nu,), minimum=minimum,
                           maximum=maximum, name='action')

  def before_step(self, physics, action, random_state):
    """Translates the agent action into the physics control vector."""
    del random_state
    physics.set_control(np.asarray(action, dtype=float))

  def before_substep(self, physics, action, random_state):
    pass

  def physics_substep(self, physics):
    """Advances the simulation by one physics substep.

    Overridable for tasks whose dynamics have an exact discrete-time form
    (the LQR domain); the callback ordering around it is unchanged.
    """
    physics.step()

  def after_substep(self, physics, random_state):
    pass

  def after_step(self, physics, random_state):
    pass

  # -- episode logic ----------------------------------------------------------------

  def initialize_episode_mjcf(self, random_state):
    pass

  def initialize_episode(self, physics, random_state):
    pass

  @abc.abstractmethod
  def get_reward(self, physics):
    raise NotImplementedError

  def get_discount(self, physics):
    return 1.0

  def should_terminate_episode(self, physics):
    return False
