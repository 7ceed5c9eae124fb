"""Analytic mass properties of uniform solid primitives.

All shapes are centred on the geom frame origin with the symmetry axis
along local z, so the centre of mass is always at the origin.
"""

import math

import numpy as np

from ctrlforge import errors

GEOM_PLANE = 0
GEOM_SPHERE = 1
GEOM_CAPSULE = 2
GEOM_CYLINDER = 3
GEOM_BOX = 4
GEOM_ELLIPSOID = 5

GEOM_TYPE_IDS = {
    'plane': GEOM_PLANE,
    'sphere': GEOM_SPHERE,
    'capsule': GEOM_CAPSULE,
    'cylinder': GEOM_CYLINDER,
    'box': GEOM_BOX,
    'ellipsoid': GEOM_ELLIPSOID,
}
GEOM_TYPE_NAMES = {v: k for k, v in GEOM_TYPE_IDS.items()}


def volume(kind, size):
  r = size[0]
  if kind == GEOM_SPHERE:
    return 4.0 / 3.0 * math.pi * r**3
  if kind == GEOM_CAPSULE:
    return math.pi * r**2 * (2.0 * size[1]) + 4.0 / 3.0 * math.pi * r**3
  if kind == GEOM_CYLINDER:
    return math.pi * r**2 * (2.0 * size[1])
  if kind == GEOM_BOX:
    return 8.0 * size[0] * size[1] * size[2]
  if kind == GEOM_ELLIPSOID:
    return 4.0 / 3.0 * math.pi * size[0] * size[1] * size[2]
  if kind == GEOM_PLANE:
    return 0.0
  raise errors.CompileError(f'unknown geom kind {kind}')


def geom_inertia(kind, size, density):
  """Mass, centre of mass and rotational inertia of a uniform solid.

  Args:
    kind: geom type id or name.
    size: canonical size array (radius / half-sizes, see compiler).
    density: mass per unit volume, kg/m^3.

  Returns:
    (mass, com, inertia): scalar kg, (3,) offset in the geom frame (always
    zero for the supported shapes), and the (3, 3) rotational inertia about
    the com in the geom frame.
  """
  if isinstance(kind, str):
    kind = GEOM_TYPE_IDS[kind]
  size = np.asarray(size, dtype=float)
  if kind != GEOM_PLANE and (np.any(size[_used_sizes(kind)] <= 0)
                             or density < 0):
    raise errors.CompileError(
        f'{GEOM_TYPE_NAMES[kind]}: sizes must be positive and density '
        f'non-negative (size={size}, density={density})')
  com = np.zeros(3)
  if kind == GEOM_PLANE or density == 0.0:
    # Zero density marks a purely visual geom: no mass contribution.
    return 0.0, com, np.zeros((3, 3))
  mass = density * volume(kind, size)
  if kind == GEOM_SPHERE:
    i = 0.4 * mass * size[0]**2
    inertia = np.diag([i, i, i])
  elif kind == GEOM_BOX:
    hx, hy, hz = size[:3]
    inertia = mass / 3.0 * np.diag(
        [hy**2 + hz**2, hx**2 + hz**2, hx**2 + hy**2])
  elif kind == GEOM_ELLIPSOID:
    a, b, c = size[:3]
    inertia = mass / 5.0 * np.diag([b**2 + c**2, a**2 + c**2, a**2 + b**2])
  elif kind == GEOM_CYLINDER:
    r, h = size[0], size[1]
    length = 2.0 * h
    i_axial = 0.5 * mass * r**2
    i_perp = mass * (3.0 * r**2 + length**2) / 12.0
    inertia = np.diag([i_perp, i_perp, i_axial])
  elif kind == GEOM_CAPSULE:
    r, h = size[0], size[1]
    length = 2.0 * h
    m_cyl = density * math.pi * r**2 * length
    m_sph = density * 4.0 / 3.0 * math.pi * r**3  # both hemispheres
    i_axial = 0.5 * m_cyl * r**2 + 0.4 * m_sph * r**2
    # Each hemisphere: inertia about its own com plus the parallel-axis
    # shift from the capsule centre (com sits 3r/8 beyond the flat face).
    m_hemi = 0.5 * m_sph
    i_hemi_com = (83.0 / 320.0) * m_hemi * r**2
    d = h + 3.0 * r / 8.0
    i_perp = (m_cyl * (3.0 * r**2 + length**2) / 12.0
              + 2.0 * (i_hemi_com + m_hemi * d**2))
    inertia = np.diag([i_perp, i_perp, i_axial])
  else:
    raise errors.CompileError(f'unknown geom kind {kind}')
  return mass, com, inertia


def _used_sizes(kind):
  if kind in (GEOM_SPHERE,):
    return slice(0, 1)
  if kind in (GEOM_CAPSULE, GEOM_CYLINDER):
    return slice(0, 2)
  return slice(0, 3)
