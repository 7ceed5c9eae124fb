"""Two-link planar reacher with a randomised target.

Reward is 1 exactly when the end effector penetrates the target sphere
(distance below the sum of the radii). `easy` uses a bigger target than
`hard`. The target is resampled every episode on an annulus reachable by
the arm.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_L1 = 0.12
_L2 = 0.12
_FINGER_SIZE = 0.01
_EASY_TARGET = 0.05
_HARD_TARGET = 0.015


def build_model(target_size):
  model = mjcf.RootElement(model='reacher')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.option.gravity = [0, 0, 0]   # planar task, top view
  model.worldbody.add('light', name='top', pos=[0, 0, 1])
  model.worldbody.add('camera', name='overhead', pos=[0, 0, 0.9], fovy=45)
  model.worldbody.add('geom', name='root', type='cylinder', density=0,
                      fromto=[0, 0, -0.02, 0, 0, 0.005], size=[0.011],
                      rgba=[0.4, 0.4, 0.4, 1])
  model.worldbody.add('geom', name='target', type='sphere',
                      size=[target_size], pos=[0.2, 0, 0], density=0,
                      rgba=[0.9, 0.2, 0.2, 0.7])
  arm = model.worldbody.add('body', name='arm')
  shoulder = arm.add('joint', name='shoulder', type='hinge', axis=[0, 0, 1],
                     damping=0.05)
  arm.add('geom', name='arm', type='capsule',
          fromto=[0, 0, 0, _L1, 0, 0], size=[_FINGER_SIZE],
          rgba=[0.4, 0.6, 0.8, 1])
  hand = arm.add('body', name='hand', pos=[_L1, 0, 0])
  wrist = hand.add('joint', name='wrist', type='hinge', axis=[0, 0, 1],
                   damping=0.05)
  hand.add('geom', name='hand', type='capsule',
           fromto=[0, 0, 0, _L2, 0, 0], size=[_FINGER_SIZE],
           rgba=[0.5, 0.8, 0.5, 1])
  hand.add('site', name='finger', pos=[_L2, 0, 0], size=[0.01])
  model.actuator.add('motor', name='shoulder', joint=shoulder, gear=0.12,
                     ctrlrange=[-1, 1])
  model.actuator.add('motor', name='wrist', joint=wrist, gear=0.12,
                     ctrlrange=[-1, 1])
  return model


class Reacher(base.SuiteTask):

  def __init__(self, target_size=_EASY_TARGET, visualize_reward=False):
    model = build_model(target_size)
    super().__init__(model, visualize_reward)
    self._target = model.find('geom', 'target')
    self._finger = model.find('site', 'finger')
    self._joints = [model.find('joint', 'shoulder'),
                    model.find('joint', 'wrist')]
    self.register_reward_geoms([self._target])
    self._observables = {
        'position': composer.Generic(self._position, enabled=True),
        'to_target': composer.Generic(self._to_target, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }

  @property
  def task_observables(self):
    return self._observables

  def _position(self, physics):
    return np.array([float(physics.bind(j).qpos) for j in self._joints])

  def _velocity(self, physics):
    return np.array([float(physics.bind(j).qvel) for j in self._joints])

  def _to_target(self, physics):
    delta = (physics.bind(self._target).xpos
             - physics.bind(self._finger).xpos)
    return delta[:2].copy()

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    for joint in self._joints:
      physics.bind(joint).qpos = base.uniform_angle(random_state)
    angle = random_state.uniform(0, 2 * np.pi)
    radius = random_state.uniform(0.05, 0.20)
    physics.bind(self._target).pos = np.array(
        [radius * np.cos(angle), radius * np.sin(angle), 0.0])
    physics.forward()

  def compute_reward(self, physics):
    distance = float(np.linalg.norm(self._to_target(physics)))
    radii = float(self._target.size[0]) + _FINGER_SIZE
    return rewards.tolerance(distance, bounds=(0, radii))
