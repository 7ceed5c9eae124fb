"""The environment loop: callback lifecycle, substepping, observation I/O.

Per-step ordering (reset and step) follows the documented callback
life-cycle exactly: task callbacks run first, then each entity's in
depth-first, attachment order. Observation buffers are written on the
schedule of each observable, with the final write of a control step
happening after `after_step`.
"""

import collections

import numpy as np

from ctrlforge import errors
from ctrlforge import physics as physics_lib
from ctrlforge.composer import observation
from ctrlforge.rl import environment as rl_environment
from ctrlforge.rl import timestep as timestep_lib


class Environment(rl_environment.Environment):
  """Wraps a Task as an agent-facing environment.

  Holds the episode's random state (seeded for reproducibility), compiles
  the model at every episode start, and truncates episodes at `time_limit`
  seconds (emitting LAST with the task's discount, 1 by default).
  """

  def __init__(self, task, time_limit=None, random_state=None,
               strip_singleton_obs_buffer_dim=True):
    self._task = task
    self._time_limit = time_limit
    if isinstance(random_state, np.random.RandomState):
      self._random_state = random_state
    else:
      self._random_state = np.random.RandomState(random_state)
    self._strip = strip_singleton_obs_buffer_dim
    self._physics = None
    self._channels = collections.OrderedDict()
    self._reset_next = True
    self._step_count = 0
    self._substep_count = 0
    self._hooks_trace = None
    # Build one throwaway episode with a cloned random state so specs are
    # available immediately without consuming the seeded stream.
    state = self._random_state.get_state()
    self._initialize_episode()
    self._random_state.set_state(state)
    self._reset_next = True

  # -- properties -----------------------------------------------------------

  @property
  def task(self):
    return self._task

  @property
  def physics(self):
    return self._physics

  @property
  def random_state(self):
    return self._random_state

  def set_hooks_trace(self, trace):
    """Records (callback, entity index) events into `trace` (a list);
    pass None to disable. Used to verify the lifecycle ordering."""
    self._hooks_trace = trace

  # -- specs ------------------------------------------------------------------

  def action_spec(self):
    return self._task.action_spec(self._physics)

  def observation_spec(self):
    return collections.OrderedDict(
        (name, channel.spec()) for name, channel in self._channels.items())

  # -- episode control ------------------------------------------------------------

  def reset(self):
    self._initialize_episode()
    return timestep_lib.restart(self._read_observations())

  def _initialize_episode(self):
    rs = self._random_state
    self._trace('initialize_episode_mjcf', None)
    self._task.initialize_episode_mjcf(rs)
    for i, entity in enumerate(self._entities()):
      self._trace('initialize_episode_mjcf', i)
      self._call(entity.initialize_episode_mjcf, 'initialize_episode_mjcf',
                 entity, rs)
    self._trace('compile', None)
    self._physics = physics_lib.Physics.from_model(
        self._task.root_entity.mjcf_model)
    self._trace('initialize_episode', None)
    self._task.initialize_episode(self._physics, rs)
    for i, entity in enumerate(self._entities()):
      self._trace('initialize_episode', i)
      self._call(entity.initialize_episode, 'initialize_episode', entity,
                 self._physics, rs)
    self._physics.forward()
    self._build_channels()
    self._step_count = 0
    self._substep_count = 0
    self._reset_next = False

  def _build_channels(self):
    self._channels = collections.OrderedDict()
    for name, obs in self._task.task_observables.items():
      if obs.enabled:
        self._channels[name] = observation.Channel(
            name, obs, self._physics, self._random_state, self._strip)
    for entity in self._entities():
      prefix = entity.observable_prefix()
      for name, obs in entity.observables.as_dict().items():
        if obs.enabled:
          key = prefix + name
          self._channels[key] = observation.Channel(
              key, obs, self._physics, self._random_state, self._strip)

  def step(self, action):
    if self._reset_next or self._physics is None:
      return self.reset()
    rs = self._random_state
    physics = self._physics
    spec = self.action_spec()
    action = spec.validate(np.asarray(action, dtype=spec.dtype))

    n_sub = self._task.substeps_per_step
    start = self._substep_count + 1
    end = self._substep_count + n_sub
    for channel in self._channels.values():
      channel.plan_step(start, end)

    self._trace('before_step', None)
    self._task.before_step(physics, action, rs)
    for i, entity in enumerate(self._entities()):
      self._trace('before_step', i)
      self._call(entity.before_step, 'before_step', entity, physics, rs)

    for sub in range(n_sub):
      self._trace('before_substep', None)
      self._task.before_substep(physics, action, rs)
      for i, entity in enumerate(self._entities()):
        self._trace('before_substep', i)
        self._call(entity.before_substep, 'before_substep', entity, physics,
                   rs)
      self._trace('physics_step', None)
      self._task.physics_substep(physics)
      self._substep_count += 1
      self._trace('after_substep', None)
      self._task.after_substep(physics, rs)
      for i, entity in enumerate(self._entities()):
        self._trace('after_substep', i)
        self._call(entity.after_substep, 'after_substep', entity, physics,
                   rs)
      if sub < n_sub - 1:
        self._trace('write_buffers', None)
        for channel in self._channels.values():
          channel.maybe_sample(self._substep_count)

    self._trace('after_step', None)
    self._task.after_step(physics, rs)
    for i, entity in enumerate(self._entities()):
      self._trace('after_step', i)
      self._call(entity.after_step, 'after_step', entity, physics, rs)
    self._trace('write_buffers_final', None)
    for channel in self._channels.values():
      channel.maybe_sample(self._substep_count)

    self._trace('read_buffers', None)
    obs = self._read_observations()
    reward = self._task.get_reward(physics)
    discount = self._task.get_discount(physics)
    self._step_count += 1

    if self._task.should_terminate_episode(physics):
      self._reset_next = True
      return timestep_lib.TimeStep(timestep_lib.StepType.LAST, reward,
                                   discount, obs)
    if self._max_steps is not None and self._step_count >= self._max_steps:
      self._reset_next = True
      return timestep_lib.TimeStep(timestep_lib.StepType.LAST, reward,
                                   discount, obs)
    return timestep_lib.TimeStep(timestep_lib.StepType.MID, reward,
                                 discount, obs)

  @property
  def _max_steps(self):
    if self._time_limit is None:
      return None
    return int(round(self._time_limit / self._task.control_timestep))

  def _read_observations(self):
    return collections.OrderedDict(
        (name, channel.read(self._substep_count))
        for name, channel in self._channels.items())

  def _entities(self):
    return self._task.root_entity.iter_entities()

  def _call(self, fn, name, entity, *args):
    try:
      fn(*args)
    except errors.DivergenceError:
      raise
    except Exception as e:
      raise errors.Error(
          f'error in {name} callback of {type(entity).__name__}: '
          f'{e}') from e

  def _trace(self, event, entity_index):
    if self._hooks_trace is not None:
      self._hooks_trace.append((event, entity_index))

  def observation_updater_call_counts(self):
    """Source-invocation counts per observable (for evaluation-economy
    checks)."""
    return {name: ch.call_count for name, ch in self._channels.items()}
