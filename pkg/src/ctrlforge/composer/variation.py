"""Per-episode randomisation of model and physics quantities.

A Variation is a seeded value generator with the signature
(initial_value, current_value, random_state) -> value. Variations compose
arithmetically with numbers and other Variations; `evaluate` resolves
arbitrarily nested structures of constants and Variations.
"""

import abc
import operator

import numpy as np


def evaluate(structure, initial_value=None, current_value=None,
             random_state=None):
  """Resolves nested callables/constants to values.

  Tuples, lists and dicts are traversed (preserving their type); callables
  are invoked with (initial_value, current_value, random_state); anything
  else passes through.
  """
  if callable(structure):
    return structure(initial_value=initial_value,
                     current_value=current_value, random_state=random_state)
  if isinstance(structure, dict):
    return {k: evaluate(v, initial_value, current_value, random_state)
            for k, v in structure.items()}
  if isinstance(structure, (list, tuple)):
    values = [evaluate(v, initial_value, current_value, random_state)
              for v in structure]
    return type(structure)(values)
  return structure


class Variation(abc.ABC):
  """Base class for seeded value generators."""

  @abc.abstractmethod
  def __call__(self, initial_value=None, current_value=None,
               random_state=None):
    raise NotImplementedError

  def __add__(self, other):
    return _BinaryOperation(operator.add, self, other)

  def __radd__(self, other):
    return _BinaryOperation(operator.add, other, self)

  def __sub__(self, other):
    return _BinaryOperation(operator.sub, self, other)

  def __rsub__(self, other):
    return _BinaryOperation(operator.sub, other, self)

  def __mul__(self, other):
    return _BinaryOperation(operator.mul, self, other)

  def __rmul__(self, other):
    return _BinaryOperation(operator.mul, other, self)

  def __truediv__(self, other):
    return _BinaryOperation(operator.truediv, self, other)

  def __rtruediv__(self, other):
    return _BinaryOperation(operator.truediv, other, self)

  def __neg__(self):
    return _BinaryOperation(operator.mul, -1.0, self)


class _BinaryOperation(Variation):
  """Arithmetic composition; operands evaluate left-to-right with the
  shared random state."""

  def __init__(self, op, left, right):
    self._op = op
    self._left = left
    self._right = right

  def __call__(self, initial_value=None, current_value=None,
               random_state=None):
    left = evaluate(self._left, initial_value, current_value, random_state)
    right = evaluate(self._right, initial_value, current_value,
                     random_state)
    return self._op(left, right)


class MJCFVariator:
  """Varies attributes of model elements between episodes.

  Apply in the pre-compile stage (initialize_episode_mjcf). The variator
  remembers each attribute's pre-variation value from the first episode
  and passes it as initial_value on every subsequent draw.
  """

  def __init__(self):
    self._bindings = []
    self._initial = {}

  def bind_attributes(self, element, **attr_variations):
    for attr, variation in attr_variations.items():
      self._bindings.append((element, attr, variation))

  def clear(self):
    self._bindings.clear()
    self._initial.clear()

  def apply_variations(self, random_state):
    for element, attr, variation in self._bindings:
      key = (id(element), attr)
      current = getattr(element, attr)
      if key not in self._initial:
        self._initial[key] = current
      value = evaluate(variation, self._initial[key], current, random_state)
      setattr(element, attr, value)


class PhysicsVariator:
  """Varies bound (compiled) attributes at episode initialization.

  Apply in initialize_episode, after the model has been compiled.
  """

  def __init__(self):
    self._bindings = []
    self._initial = {}

  def bind_attributes(self, element, **attr_variations):
    for attr, variation in attr_variations.items():
      self._bindings.append((element, attr, variation))

  def clear(self):
    self._bindings.clear()
    self._initial.clear()

  def apply_variations(self, physics, random_state):
    for element, attr, variation in self._bindings:
      key = (id(element), attr)
      binding = physics.bind(element)
      current = np.copy(getattr(binding, attr))
      if key not in self._initial:
        self._initial[key] = current
      value = evaluate(variation, self._initial[key], current, random_state)
      setattr(binding, attr, value)
