"""Unit-interval reward shaping.

`tolerance()` is the workhorse: 1 inside a target interval, decaying over
an optional margin with a selectable sigmoid profile. Because outputs stay
in [0, 1], rewards compose by averaging and multiplication.

Sigmoid normalization: every kind is scaled so its value at a normalized
distance of 1 (i.e. at `margin`) equals `value_at_margin`. The analytic
forms are:

  gaussian      exp(-(k x)^2 / 2)
  hyperbolic    sech(k x)
  long_tail     1 / ((k x)^2 + 1)        (a Lorentzian)
  tanh_squared  1 - tanh(k x)^2
  cosine        (1 + cos(pi k x)) / 2    on |k x| < 1, else 0
  linear        1 - k x                  on |k x| < 1, else 0
  quadratic     1 - (k x)^2              on |k x| < 1, else 0

The last three have finite support: with value_at_margin=0 they are
exactly zero for distances >= margin. The infinite-support kinds require
value_at_margin > 0.
"""

import numpy as np

from ctrlforge import errors

SIGMOIDS = ('gaussian', 'hyperbolic', 'long_tail', 'cosine', 'linear',
            'quadratic', 'tanh_squared')
FINITE_SUPPORT = ('cosine', 'linear', 'quadratic')

_DEFAULT_VALUE_AT_MARGIN = 0.1


def sigmoid_value(kind, x, value_at_margin):
  """Evaluates one sigmoid profile at normalized distance x = d / margin.

  Monotone non-increasing for x >= 0, equal to 1 at x=0 and to
  `value_at_margin` at x=1.
  """
  if kind not in SIGMOIDS:
    raise errors.Error(
        f"unknown sigmoid '{kind}'; valid kinds: {SIGMOIDS}")
  v = float(value_at_margin)
  if kind in FINITE_SUPPORT:
    if not 0 <= v < 1:
      raise errors.Error(
          f'{kind}: value_at_margin must be in [0, 1), got {v}')
  elif not 0 < v < 1:
    raise errors.Error(
        f'{kind}: value_at_margin must be positive for an infinite-support '
        f'sigmoid, got {v}')
  x = np.asarray(x, dtype=float)
  if kind == 'gaussian':
    scale = np.sqrt(-2.0 * np.log(v))
    return np.exp(-0.5 * (x * scale) ** 2)
  if kind == 'hyperbolic':
    scale = np.arccosh(1.0 / v)
    with np.errstate(over='ignore'):   # cosh overflow -> 1/inf -> 0
      return 1.0 / np.cosh(x * scale)
  if kind == 'long_tail':
    scale = np.sqrt(1.0 / v - 1.0)
    return 1.0 / ((x * scale) ** 2 + 1.0)
  if kind == 'tanh_squared':
    scale = np.arctanh(np.sqrt(1.0 - v))
    return 1.0 - np.tanh(x * scale) ** 2
  if kind == 'cosine':
    scaled = x * np.arccos(2.0 * v - 1.0) / np.pi
    with np.errstate(invalid='ignore'):
      return np.where(np.abs(scaled) < 1,
                      (1.0 + np.cos(np.pi * scaled)) / 2.0, 0.0)
  if kind == 'linear':
    scaled = x * (1.0 - v)
    return np.where(np.abs(scaled) < 1, 1.0 - scaled, 0.0)
  # quadratic
  scaled = x * np.sqrt(1.0 - v)
  return np.where(np.abs(scaled) < 1, 1.0 - scaled ** 2, 0.0)


def tolerance(x, bounds=(0.0, 0.0), margin=0.0, sigmoid='gaussian',
              value_at_margin=_DEFAULT_VALUE_AT_MARGIN):
  """Shaped indicator of x lying within `bounds`.

  Returns 1 when lower <= x <= upper. With margin=0 the output is the hard
  0/1 indicator; otherwise it decreases with the distance d to the
  interval, reaching `value_at_margin` at d=margin. Elementwise on arrays.

  Args:
    x: scalar or array input.
    bounds: (lower, upper) target interval, lower <= upper.
    margin: decay length outside the interval, >= 0.
    sigmoid: one of SIGMOIDS.
    value_at_margin: output at d=margin; must be positive for
      infinite-support sigmoids and may be 0 for the finite-support ones.

  Returns:
    A value (or array) in [0, 1], same shape as x.
  """
  lower, upper = bounds
  if lower > upper:
    raise errors.Error(f'bounds must be ordered, got ({lower}, {upper})')
  if margin < 0:
    raise errors.Error(f'margin must be non-negative, got {margin}')
  x = np.asarray(x, dtype=float)
  in_bounds = np.logical_and(lower <= x, x <= upper)
  if margin == 0:
    value = np.where(in_bounds, 1.0, 0.0)
  else:
    d = np.where(x < lower, lower - x, x - upper) / margin
    value = np.where(in_bounds, 1.0,
                     sigmoid_value(sigmoid, d, value_at_margin))
  return float(value) if value.ndim == 0 else value
