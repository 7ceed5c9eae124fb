"""Environment wrappers: pixel observations and observation flattening."""

import collections

import numpy as np

from ctrlforge import errors
from ctrlforge.rl import environment
from ctrlforge.rl import specs


class Wrapper(environment.Environment):
  """Delegating base: forwards everything to the wrapped environment."""

  def __init__(self, env):
    self._env = env

  @property
  def wrapped(self):
    return self._env

  @property
  def physics(self):
    return self._env.physics

  def reset(self):
    return self._env.reset()

  def step(self, action):
    return self._env.step(action)

  def action_spec(self):
    return self._env.action_spec()

  def observation_spec(self):
    return self._env.observation_spec()

  def close(self):
    self._env.close()


class PixelObservations(Wrapper):
  """Adds (or substitutes) rendered pixels in the observation map.

  The wrapped environment must expose a `physics` with `render()`. With
  pixels_only=True the observation map contains exactly the pixels key;
  otherwise pixels are appended after the existing observations.
  """

  def __init__(self, env, pixels_only=True, render_kwargs=None,
               observation_key='pixels'):
    super().__init__(env)
    if not hasattr(env, 'physics'):
      raise errors.Error(
          'PixelObservations needs an environment exposing .physics')
    self._pixels_only = pixels_only
    self._render_kwargs = dict(render_kwargs or {})
    self._render_kwargs.setdefault('height', 240)
    self._render_kwargs.setdefault('width', 320)
    self._key = observation_key
    if observation_key in env.observation_spec() and pixels_only is False:
      raise errors.Error(
          f"observation key '{observation_key}' already exists")

  def observation_spec(self):
    spec = collections.OrderedDict()
    if not self._pixels_only:
      spec.update(self._env.observation_spec())
    h = self._render_kwargs['height']
    w = self._render_kwargs['width']
    spec[self._key] = specs.ArraySpec(shape=(h, w, 3), dtype=np.uint8,
                                      name=self._key)
    return spec

  def reset(self):
    return self._add_pixels(self._env.reset())

  def step(self, action):
    return self._add_pixels(self._env.step(action))

  def _add_pixels(self, timestep):
    obs = collections.OrderedDict()
    if not self._pixels_only:
      obs.update(timestep.observation)
    obs[self._key] = self.physics.render(mode='rgb', **self._render_kwargs)
    return timestep._replace(observation=obs)


class FlattenObservations(Wrapper):
  """Concatenates all observations into one float vector.

  Concatenation order follows the wrapped observation_spec order; the
  total length is the sum of the component sizes.
  """

  KEY = 'observations'

  def __init__(self, env):
    super().__init__(env)
    self._size = sum(int(np.prod(s.shape))
                     for s in env.observation_spec().values())

  def observation_spec(self):
    return collections.OrderedDict(
        [(self.KEY, specs.ArraySpec(shape=(self._size,), name=self.KEY))])

  def reset(self):
    return self._flatten(self._env.reset())

  def step(self, action):
    return self._flatten(self._env.step(action))

  def _flatten(self, timestep):
    obs = timestep.observation
    if obs:
      flat = np.concatenate([np.asarray(v, dtype=float).ravel()
                             for v in obs.values()])
    else:
      flat = np.zeros(0)
    return timestep._replace(
        observation=collections.OrderedDict([(self.KEY, flat)]))

  def unflatten(self, vector):
    """Splits a flat vector back into the wrapped observation map."""
    vector = np.asarray(vector).ravel()
    out = collections.OrderedDict()
    offset = 0
    for name, spec in self._env.observation_spec().items():
      size = int(np.prod(spec.shape))
      out[name] = vector[offset:offset + size].reshape(spec.shape)
      offset += size
    return out
