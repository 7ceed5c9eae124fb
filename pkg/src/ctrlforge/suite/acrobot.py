"""Underactuated double pendulum: torque on the elbow joint only.

The goal is to swing the tip up to a target above the shoulder and keep
it there. `swingup` shapes the reward smoothly with distance (a long-tail
profile); `swingup_sparse` pays 1 only with the tip inside the target.

Initial state: both angles uniform over the full circle, zero velocity.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_LINK = 0.5
_RADIUS = 0.03
_TARGET_RADIUS = 0.12


def build_model():
  model = mjcf.RootElement(model='acrobot')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.worldbody.add('light', name='top', pos=[0, 0, 3])
  model.worldbody.add('camera', name='side', pos=[0, -3.2, 0],
                      euler=[np.pi / 2, 0, 0], fovy=50)
  target = model.worldbody.add(
      'geom', name='target', type='sphere', size=[_TARGET_RADIUS],
      pos=[0, 0, 2 * _LINK], rgba=[0.9, 0.2, 0.2, 0.5], density=0)
  upper = model.worldbody.add('body', name='upper_arm')
  shoulder = upper.add('joint', name='shoulder', type='hinge',
                       axis=[0, 1, 0])
  upper.add('geom', name='upper_arm', type='capsule',
            fromto=[0, 0, 0, 0, 0, _LINK], size=[_RADIUS],
            rgba=[0.6, 0.6, 0.9, 1])
  lower = upper.add('body', name='lower_arm', pos=[0, 0, _LINK])
  elbow = lower.add('joint', name='elbow', type='hinge', axis=[0, 1, 0])
  lower.add('geom', name='lower_arm', type='capsule',
            fromto=[0, 0, 0, 0, 0, _LINK], size=[_RADIUS],
            rgba=[0.6, 0.9, 0.6, 1])
  lower.add('site', name='tip', pos=[0, 0, _LINK], size=[0.01])
  model.actuator.add('motor', name='elbow', joint=elbow, gear=4,
                     ctrlrange=[-1, 1])
  return model, target


class SwingUp(base.SuiteTask):

  def __init__(self, sparse=False, visualize_reward=False):
    model, target = build_model()
    super().__init__(model, visualize_reward)
    self._sparse = sparse
    self._target = target
    self._tip = model.find('site', 'tip')
    self._shoulder = model.find('joint', 'shoulder')
    self._elbow = model.find('joint', 'elbow')
    self.register_reward_geoms([target])
    self._observables = {
        'orientations': composer.Generic(self._orientations, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }

  @property
  def task_observables(self):
    return self._observables

  def _orientations(self, physics):
    angles = np.array([physics.bind(self._shoulder).qpos,
                       physics.bind(self._elbow).qpos])
    return np.concatenate([np.cos(angles), np.sin(angles)])

  def _velocity(self, physics):
    return np.array([physics.bind(self._shoulder).qvel,
                     physics.bind(self._elbow).qvel])

  def _tip_to_target(self, physics):
    return float(np.linalg.norm(
        physics.bind(self._target).xpos - physics.bind(self._tip).xpos))

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    physics.bind(self._shoulder).qpos = base.uniform_angle(random_state)
    physics.bind(self._elbow).qpos = base.uniform_angle(random_state)
    physics.forward()

  def compute_reward(self, physics):
    distance = self._tip_to_target(physics)
    radius = float(self._target.size[0])
    if self._sparse:
      return rewards.tolerance(distance, bounds=(0, radius))
    return rewards.tolerance(distance, bounds=(0, radius), margin=1.0,
                             sigmoid='long_tail')
