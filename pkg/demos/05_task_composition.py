"""Composing a task: entities, noisy/delayed observables, variations.

A steerable ball entity chases a target whose position is redrawn every
episode. Joint observations pass through additive noise, and a delayed,
buffered speed channel shows the observation pipeline at work.
"""

import numpy as np

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.composer import distributions
from ctrlforge.composer import noises
from ctrlforge.composer import variation
from ctrlforge.rl import rewards


class Ball(composer.Entity):
  """A ball driven by two planar force actuators."""

  def _build(self):
    self._model = mjcf.RootElement(model='ball')
    body = self._model.worldbody.add('body', name='ball')
    self._joints = [
        body.add('joint', name='x', type='slide', axis=[1, 0, 0],
                 damping=1.0),
        body.add('joint', name='y', type='slide', axis=[0, 1, 0],
                 damping=1.0),
    ]
    body.add('geom', name='ball', type='sphere', size=[0.04], mass=0.5)
    for joint in self._joints:
      self._model.actuator.add('motor', joint=joint, gear=1,
                               ctrlrange=[-1, 1])

  def _build_observables(self):
    return BallObservables(self)

  @property
  def mjcf_model(self):
    return self._model

  @property
  def joints(self):
    return self._joints


class BallObservables(composer.Observables):

  @composer.observable
  def position(self):
    return composer.MJCFFeature('qpos', self._entity.joints)

  @composer.observable
  def velocity(self):
    return composer.MJCFFeature('qvel', self._entity.joints)


class ChaseTask(composer.Task):

  def __init__(self):
    self._arena = composer.ModelWrapperEntity(
        mjcf.RootElement(model='arena'))
    arena_model = self._arena.mjcf_model
    arena_model.worldbody.add('light', name='top', pos=[0, 0, 2])
    arena_model.worldbody.add('geom', name='floor', type='plane',
                              size=[1, 1, 0.1])
    self._target = arena_model.worldbody.add(
        'geom', name='target', type='sphere', size=[0.05], density=0,
        pos=[0.3, 0.3, 0.04], rgba=[0.9, 0.2, 0.2, 0.8])
    self._ball = Ball()
    self._arena.attach(self._ball)
    self.control_timestep = 10 * self.physics_timestep

    # Noisy joint positions; a buffered, delayed speed channel.
    obs = self._ball.observables
    obs.position.corruptor = noises.Additive(
        distributions.Normal(scale=0.01))
    obs.position.enabled = True
    obs.velocity.buffer_size = 5
    obs.velocity.delay = 2
    obs.velocity.aggregator = 'mean'
    obs.velocity.enabled = True

    # Give every episode a fresh target location.
    self._physics_variator = variation.PhysicsVariator()
    self._physics_variator.bind_attributes(
        self._target,
        pos=distributions.Uniform([-0.5, -0.5, 0.04], [0.5, 0.5, 0.04],
                                  single_sample=True))

  @property
  def root_entity(self):
    return self._arena

  def initialize_episode(self, physics, random_state):
    self._physics_variator.apply_variations(physics, random_state)

  def get_reward(self, physics):
    ball_pos = physics.bind(self._ball.joints).qpos
    target = physics.bind(self._target).pos[:2]
    return rewards.tolerance(float(np.linalg.norm(ball_pos - target)),
                             bounds=(0, 0.05), margin=0.5)


env = composer.Environment(ChaseTask(), time_limit=4.0, random_state=1)
print('observation spec:')
for name, spec in env.observation_spec().items():
  print(f'  {name:22s} shape={spec.shape}')

timestep = env.reset()
target = env.physics.bind(env.task._target).pos[:2]
print('\nepisode target at', np.round(target, 3))
while not timestep.last():
  ball = env.physics.bind(env.task._ball.joints).qpos
  action = np.clip(3.0 * (target - ball), -1, 1)   # crude proportional law
  timestep = env.step(action)
print(f'final reward {timestep.reward:.3f}, '
      f'final distance {np.linalg.norm(target - ball):.3f} m')
