"""Observation-noise Variations built on distributions."""

from ctrlforge.composer.variation import Variation
from ctrlforge.composer.variation import evaluate


class Additive(Variation):
  """Additive noise: value + sample(distribution)."""

  def __init__(self, distribution):
    self._distribution = distribution

  def __call__(self, initial_value=None, current_value=None,
               random_state=None):
    amount = evaluate(self._distribution, initial_value, current_value,
                      random_state)
    if initial_value is None:
      return amount
    return initial_value + amount


class Multiplicative(Variation):
  """Multiplicative noise: value * sample(distribution)."""

  def __init__(self, distribution):
    self._distribution = distribution

  def __call__(self, initial_value=None, current_value=None,
               random_state=None):
    amount = evaluate(self._distribution, initial_value, current_value,
                      random_state)
    if initial_value is None:
      return amount
    return initial_value * amount
