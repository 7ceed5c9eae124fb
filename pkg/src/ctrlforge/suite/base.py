"""Shared machinery for the benchmark domains.

Suite tasks follow the standard conventions: unit-box actions (except
LQR), rewards in [0, 1] (except LQR), gamma = 1 everywhere except LQR's
near-origin termination, and fixed 1000-control-step episodes. Reward,
discount and termination are computed once per step in `after_step` and
cached.
"""

import numpy as np

from ctrlforge import composer

DEFAULT_PHYSICS_TIMESTEP = 0.002
DEFAULT_CONTROL_TIMESTEP = 0.02
EPISODE_STEPS = 1000

# Reward-visualisation brightness range: geoms scale from dim to full.
_VIS_FLOOR = 0.3


class SuiteTask(composer.Task):
  """Base task owning a single arena entity built from a model root."""

  def __init__(self, model, visualize_reward=False):
    self._arena = composer.ModelWrapperEntity(model)
    self._visualize_reward = visualize_reward
    self._reward_geoms = []     # (element, base rgb)
    self._reward = 0.0
    self._discount = 1.0
    self._terminate = False
    self.control_timestep = DEFAULT_CONTROL_TIMESTEP

  @property
  def root_entity(self):
    return self._arena

  @property
  def model(self):
    return self._arena.mjcf_model

  def register_reward_geoms(self, geoms):
    """Geoms whose brightness tracks the reward when visualisation is on."""
    for geom in geoms:
      self._reward_geoms.append((geom, np.array(geom.rgba[:3],
                                                dtype=float)))

  # -- episode logic ------------------------------------------------------------

  def initialize_episode(self, physics, random_state):
    self._reward = 0.0
    self._discount = 1.0
    self._terminate = False
    self._apply_visualisation(physics)

  def after_step(self, physics, random_state):
    self._reward = float(self.compute_reward(physics))
    self._discount = float(self.compute_discount(physics))
    self._terminate = bool(self.compute_termination(physics))
    self._apply_visualisation(physics)

  def compute_reward(self, physics):
    raise NotImplementedError

  def compute_discount(self, physics):
    return 1.0

  def compute_termination(self, physics):
    return False

  def get_reward(self, physics):
    return self._reward

  def get_discount(self, physics):
    return self._discount

  def should_terminate_episode(self, physics):
    return self._terminate

  def _apply_visualisation(self, physics):
    if not self._visualize_reward:
      return
    brightness = _VIS_FLOOR + (1.0 - _VIS_FLOOR) * np.clip(self._reward,
                                                           0.0, 1.0)
    for geom, base_rgb in self._reward_geoms:
      binding = physics.bind(geom)
      rgba = np.copy(binding.rgba)
      rgba[:3] = base_rgb * brightness
      binding.rgba = rgba


def uniform_angle(random_state, size=None):
  return random_state.uniform(-np.pi, np.pi, size)
