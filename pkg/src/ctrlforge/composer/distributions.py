"""Distribution-backed Variations over numpy.random samplers."""

import numpy as np

from ctrlforge import errors
from ctrlforge.composer.variation import Variation
from ctrlforge.composer.variation import evaluate


class _Distribution(Variation):
  """Wraps a numpy.random sampler; parameters may themselves be
  Variations."""

  sampler = None  # name of the np.random.RandomState method

  def __init__(self, *args, single_sample=False, **kwargs):
    self._args = args
    self._kwargs = kwargs
    self._single_sample = single_sample

  def __call__(self, initial_value=None, current_value=None,
               random_state=None):
    random_state = random_state or np.random
    args = evaluate(self._args, initial_value, current_value, random_state)
    kwargs = evaluate(self._kwargs, initial_value, current_value,
                      random_state)
    size = None
    if not self._single_sample and initial_value is not None:
      shape = np.shape(initial_value)
      size = shape if shape else None
    return getattr(random_state, self.sampler)(*args, size=size, **kwargs)


class Uniform(_Distribution):
  sampler = 'uniform'

  def __init__(self, low=0.0, high=1.0, **kwargs):
    if not callable(low) and not callable(high) and high < low:
      raise errors.Error(f'Uniform needs high >= low, got [{low}, {high})')
    super().__init__(low, high, **kwargs)


class Normal(_Distribution):
  sampler = 'normal'

  def __init__(self, loc=0.0, scale=1.0, **kwargs):
    if not callable(scale) and scale <= 0:
      raise errors.Error(f'Normal needs scale > 0, got {scale}')
    super().__init__(loc, scale, **kwargs)


class LogNormal(_Distribution):
  sampler = 'lognormal'

  def __init__(self, mean=0.0, sigma=1.0, **kwargs):
    if not callable(sigma) and sigma <= 0:
      raise errors.Error(f'LogNormal needs sigma > 0, got {sigma}')
    super().__init__(mean, sigma, **kwargs)
