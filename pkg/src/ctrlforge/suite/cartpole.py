"""Cart-pole: swing up / balance one or more serially connected poles.

A force actuator drives the cart along a rail; the poles are unactuated.
`balance` starts near upright, `swingup` with the first pole hanging down.
The `two_poles`/`three_poles` variants procedurally chain extra poles
(each of length 1/k), which makes the task dramatically harder.

Rewards are products of unit-interval terms (upright poles, centred cart,
small control, small velocity); the sparse variants pay only inside tight
cart/angle bands.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.rl import rewards
from ctrlforge.suite import base

_CART_MASS = 1.0
_POLE_MASS = 0.1
_RAIL_LIMIT = 1.8


def build_model(num_poles=1):
  if num_poles < 1:
    raise ValueError(f'need at least one pole, got {num_poles}')
  model = mjcf.RootElement(model='cartpole')
  model.compiler.angle = 'radian'
  model.option.timestep = base.DEFAULT_PHYSICS_TIMESTEP
  model.option.integrator = 'rk4'
  model.worldbody.add('light', name='top', pos=[0, 0, 3])
  model.worldbody.add('camera', name='side', pos=[0, -4, 1],
                      euler=[np.radians(80), 0, 0], fovy=45)
  model.worldbody.add('geom', name='rail', type='capsule', density=0,
                      fromto=[-_RAIL_LIMIT, 0, 0, _RAIL_LIMIT, 0, 0],
                      size=[0.015], rgba=[0.5, 0.5, 0.5, 1])
  cart = model.worldbody.add('body', name='cart')
  slider = cart.add('joint', name='slider', type='slide', axis=[1, 0, 0],
                    limited='true', range=[-_RAIL_LIMIT, _RAIL_LIMIT])
  cart.add('geom', name='cart', type='box', size=[0.1, 0.06, 0.05],
           mass=_CART_MASS, rgba=[0.3, 0.3, 0.8, 1])
  pole_length = 1.0 / num_poles
  parent = cart
  attach_at = 0.0
  poles = []
  hinges = []
  for i in range(num_poles):
    pole_body = parent.add('body', name=f'pole_{i + 1}',
                           pos=[0, 0, attach_at])
    hinge = pole_body.add('joint', name=f'hinge_{i + 1}', type='hinge',
                          axis=[0, 1, 0])
    pole = pole_body.add('geom', name=f'pole_{i + 1}', type='capsule',
                         fromto=[0, 0, 0, 0, 0, pole_length], size=[0.025],
                         mass=_POLE_MASS / num_poles,
                         rgba=[0.8, 0.4, 0.2, 1])
    poles.append(pole)
    hinges.append(hinge)
    parent = pole_body
    attach_at = pole_length
  model.actuator.add('motor', name='slide', joint=slider, gear=10,
                     ctrlrange=[-1, 1])
  return model, slider, hinges, poles


class CartPole(base.SuiteTask):

  def __init__(self, num_poles=1, swing_up=True, sparse=False,
               visualize_reward=False):
    model, slider, hinges, poles = build_model(num_poles)
    super().__init__(model, visualize_reward)
    self._slider = slider
    self._hinges = hinges
    self._swing_up = swing_up
    self._sparse = sparse
    self.register_reward_geoms(poles)
    self._observables = {
        'position': composer.Generic(self._position, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }

  @property
  def task_observables(self):
    return self._observables

  def _angles(self, physics):
    return np.array([float(physics.bind(h).qpos) for h in self._hinges])

  def _position(self, physics):
    angles = self._angles(physics)
    return np.concatenate([[float(physics.bind(self._slider).qpos)],
                           np.cos(angles), np.sin(angles)])

  def _velocity(self, physics):
    return np.concatenate([[float(physics.bind(self._slider).qvel)],
                           [float(physics.bind(h).qvel)
                            for h in self._hinges]])

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    physics.bind(self._slider).qpos = random_state.uniform(-0.1, 0.1)
    for i, hinge in enumerate(self._hinges):
      if self._swing_up:
        angle = (np.pi + random_state.uniform(-0.1, 0.1) if i == 0
                 else random_state.uniform(-0.1, 0.1))
      else:
        angle = random_state.uniform(-np.radians(5), np.radians(5))
      physics.bind(hinge).qpos = angle
    physics.forward()

  def compute_reward(self, physics):
    cart_x = float(physics.bind(self._slider).qpos)
    cosines = np.cos(self._angles(physics))
    if self._sparse:
      cart_in_bounds = rewards.tolerance(cart_x, bounds=(-0.25, 0.25))
      angles_in_bounds = np.prod(
          rewards.tolerance(cosines, bounds=(0.995, 1.0)))
      return cart_in_bounds * angles_in_bounds
    upright = float(np.mean((cosines + 1.0) / 2.0))
    centered = (1.0 + rewards.tolerance(cart_x, margin=2.0)) / 2.0
    ctrl = physics.data.ctrl
    small_control = float(np.mean(rewards.tolerance(
        ctrl, margin=1.0, value_at_margin=0.0, sigmoid='quadratic')))
    small_control = (4.0 + small_control) / 5.0
    ang_vel = np.array([float(physics.bind(h).qvel) for h in self._hinges])
    small_velocity = float(np.min(rewards.tolerance(ang_vel, margin=5.0)))
    small_velocity = (1.0 + small_velocity) / 2.0
    return upright * small_control * small_velocity * centered
