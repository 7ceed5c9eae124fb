"""Array specifications for actions and observations."""

import numpy as np

from ctrlforge import errors


class ArraySpec:
  """Shape and dtype of an array, with optional elementwise bounds.

  A spec without bounds describes an unbounded array (the LQR action
  space); `minimum`/`maximum` then read as -inf/+inf.
  """

  def __init__(self, shape, dtype=np.float64, minimum=None, maximum=None,
               name=None):
    self._shape = tuple(int(s) for s in shape)
    self._dtype = np.dtype(dtype)
    self._name = name
    self._bounded = minimum is not None or maximum is not None
    minimum = -np.inf if minimum is None else minimum
    maximum = np.inf if maximum is None else maximum
    self._minimum = np.broadcast_to(
        np.asarray(minimum, dtype=np.float64), self._shape)
    self._maximum = np.broadcast_to(
        np.asarray(maximum, dtype=np.float64), self._shape)
    if np.any(self._minimum > self._maximum):
      raise errors.SpecViolationError(
          f'spec minimum exceeds maximum: {minimum} > {maximum}')

  @property
  def shape(self):
    return self._shape

  @property
  def dtype(self):
    return self._dtype

  @property
  def name(self):
    return self._name

  @property
  def minimum(self):
    return self._minimum

  @property
  def maximum(self):
    return self._maximum

  @property
  def bounded(self):
    return self._bounded

  def validate(self, value):
    """Returns `value` as an array, raising SpecViolationError on shape,
    dtype or bound violations (naming the offending indices)."""
    arr = np.asarray(value)
    if arr.shape != self._shape:
      raise errors.SpecViolationError(
          f"{self._label()}: expected shape {self._shape}, got {arr.shape}")
    if not np.can_cast(arr.dtype, self._dtype, casting='same_kind'):
      raise errors.SpecViolationError(
          f"{self._label()}: expected dtype {self._dtype}, got {arr.dtype}")
    arr = arr.astype(self._dtype, copy=False)
    if self._bounded:
      low = arr < self._minimum
      high = arr > self._maximum
      if low.any() or high.any():
        bad = np.argwhere(low | high).ravel().tolist()
        bounds = (f'[{np.min(self._minimum):g}, {np.max(self._maximum):g}]')
        raise errors.SpecViolationError(
            f'{self._label()}: value out of bounds {bounds} at indices '
            f'{bad}')
    if not np.isfinite(arr).all():
      raise errors.SpecViolationError(
          f'{self._label()}: non-finite entries at indices '
          f'{np.argwhere(~np.isfinite(arr)).ravel().tolist()}')
    return arr

  def generate_value(self):
    return np.zeros(self._shape, dtype=self._dtype)

  def _label(self):
    return self._name or 'spec'

  def replace(self, **kwargs):
    args = dict(shape=self._shape, dtype=self._dtype, name=self._name)
    if self._bounded:
      args.update(minimum=self._minimum, maximum=self._maximum)
    args.update(kwargs)
    return ArraySpec(**args)

  def __repr__(self):
    bounds = (f', min={self._minimum.ravel()[:4]}, '
              f'max={self._maximum.ravel()[:4]}' if self._bounded else '')
    return (f'ArraySpec(shape={self._shape}, dtype={self._dtype.name}'
            f'{bounds}, name={self._name!r})')

  def __eq__(self, other):
    if not isinstance(other, ArraySpec):
      return NotImplemented
    return (self._shape == other._shape and self._dtype == other._dtype
            and self._bounded == other._bounded
            and np.array_equal(self._minimum, other._minimum)
            and np.array_equal(self._maximum, other._maximum))

  def __hash__(self):
    return hash((self._shape, self._dtype))


def unit_box(shape, name=None):
  """The suite's standard action spec: every component in [-1, 1]."""
  return ArraySpec(shape, minimum=-1.0, maximum=1.0, name=name)
