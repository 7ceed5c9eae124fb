"""Planar point mass steered onto a target at the origin.

In `easy` the two actuators drive the global x and y axes directly. In
`hard` the 2x2 gain matrix from controls to axis forces is redrawn every
episode, so a memoryless agent cannot solve it; `hard` is excluded from
the benchmarking set.

Initial state: position uniform in the arena square, zero velocity.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_ARENA = 0.3
_START = 0.25
_TARGET_SIZE = 0.03
_MASS_SIZE = 0.02


def build_model():
  model = mjcf.RootElement(model='point_mass')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.worldbody.add('light', name='top', pos=[0, 0, 1])
  model.worldbody.add('camera', name='overhead', pos=[0, 0, 1.2], fovy=45)
  model.worldbody.add('geom', name='floor', type='plane',
                      size=[_ARENA, _ARENA, 0.1], rgba=[0.3, 0.35, 0.4, 1])
  model.worldbody.add('geom', name='target', type='sphere',
                      size=[_TARGET_SIZE], pos=[0, 0, 0.01], density=0,
                      rgba=[0.9, 0.2, 0.2, 0.8])
  ball = model.worldbody.add('body', name='pointmass', pos=[0, 0, 0.01])
  root_x = ball.add('joint', name='root_x', type='slide', axis=[1, 0, 0],
                    damping=0.5, limited='true', range=[-_ARENA, _ARENA])
  root_y = ball.add('joint', name='root_y', type='slide', axis=[0, 1, 0],
                    damping=0.5, limited='true', range=[-_ARENA, _ARENA])
  ball.add('geom', name='pointmass', type='sphere', size=[_MASS_SIZE],
           mass=0.3, rgba=[0.2, 0.6, 0.9, 1])
  model.actuator.add('motor', name='t1', joint=root_x, gear=1,
                     ctrlrange=[-1, 1])
  model.actuator.add('motor', name='t2', joint=root_y, gear=1,
                     ctrlrange=[-1, 1])
  return model


class PointMass(base.SuiteTask):

  def __init__(self, randomize_gains=False, visualize_reward=False):
    model = build_model()
    super().__init__(model, visualize_reward)
    self._randomize_gains = randomize_gains
    self._gains = np.eye(2)
    self._target = model.find('geom', 'target')
    self._mass_geom = model.find('geom', 'pointmass')
    self._joints = [model.find('joint', 'root_x'),
                    model.find('joint', 'root_y')]
    self.register_reward_geoms([self._target])
    self._observables = {
        'position': composer.Generic(self._position, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }

  @property
  def task_observables(self):
    return self._observables

  def _position(self, physics):
    return np.array([float(physics.bind(j).qpos) for j in self._joints])

  def _velocity(self, physics):
    return np.array([float(physics.bind(j).qvel) for j in self._joints])

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    for joint in self._joints:
      physics.bind(joint).qpos = random_state.uniform(-_START, _START)
    if self._randomize_gains:
      self._gains = self._sample_gains(random_state)
    physics.forward()

  def _sample_gains(self, random_state):
    # Rows are random unit vectors, redrawn until comfortably independent.
    while True:
      gains = random_state.randn(2, 2)
      gains /= np.linalg.norm(gains, axis=1, keepdims=True)
      if abs(np.linalg.det(gains)) > 0.2:
        return gains

  def before_step(self, physics, action, random_state):
    physics.set_control(self._gains @ np.asarray(action, dtype=float))

  def compute_reward(self, physics):
    delta = (physics.bind(self._target).xpos
             - physics.bind(self._mass_geom).xpos)
    distance = float(np.linalg.norm(delta[:2]))
    near_target = rewards.tolerance(distance, bounds=(0, _TARGET_SIZE),
                                    margin=_TARGET_SIZE)
    control = physics.data.ctrl
    small_control = float(np.mean(rewards.tolerance(
        control, margin=1.0, value_at_margin=0.0, sigmoid='quadratic')))
    return near_target * (small_control + 4.0) / 5.0
