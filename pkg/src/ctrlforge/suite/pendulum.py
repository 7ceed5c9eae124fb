"""Inverted pendulum swing-up.

A single pole on an unactuated-strength-limited hinge: the motor is a
sixth as strong as needed to lift the pole from motionless horizontal, so
solving the task requires pumping energy over several swings. Sparse
reward: 1 while the pole is within 30 degrees of upright.

Initial state: hinge angle uniform over the full circle, zero velocity.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.engine import compiler
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_LENGTH = 0.5
_RADIUS = 0.045
_COS_BAND = np.cos(np.radians(30.0))


def build_model():
  model = mjcf.RootElement(model='pendulum')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.worldbody.add('light', name='top', pos=[0, 0, 2])
  model.worldbody.add('camera', name='side', pos=[0, -1.8, 0.6],
                      euler=[np.radians(75), 0, 0], fovy=60)
  pole_body = model.worldbody.add('body', name='pole')
  hinge = pole_body.add('joint', name='hinge', type='hinge', axis=[0, 1, 0])
  pole = pole_body.add('geom', name='pole', type='capsule',
                       fromto=[0, 0, 0, 0, 0, _LENGTH], size=[_RADIUS],
                       rgba=[0.8, 0.2, 0.2, 1])
  # Torque-limit the motor to 1/6 of the holding torque at horizontal.
  compiled = compiler.compile_model(model)
  mass = compiled.body_mass[1]
  com = compiled.body_com[1][2]
  holding_torque = mass * 9.81 * abs(com)
  model.actuator.add('motor', name='torque', joint=hinge,
                     gear=holding_torque / 6.0, ctrlrange=[-1, 1])
  model.sensor.add('jointpos', name='hinge_pos', joint=hinge)
  return model, pole


class SwingUp(base.SuiteTask):

  def __init__(self, visualize_reward=False):
    model, pole = build_model()
    super().__init__(model, visualize_reward)
    self._hinge = model.find('joint', 'hinge')
    self.register_reward_geoms([pole])
    obs = {
        'orientation': composer.Generic(self._orientation, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }
    self._observables = obs

  @property
  def task_observables(self):
    return self._observables

  def _orientation(self, physics):
    angle = physics.bind(self._hinge).qpos
    return np.array([np.cos(angle), np.sin(angle)])

  def _velocity(self, physics):
    return np.array([physics.bind(self._hinge).qvel])

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    physics.bind(self._hinge).qpos = base.uniform_angle(random_state)
    physics.forward()

  def compute_reward(self, physics):
    upright = np.cos(physics.bind(self._hinge).qpos)
    return rewards.tolerance(upright, bounds=(_COS_BAND, 1.0))
