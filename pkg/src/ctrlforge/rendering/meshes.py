"""Triangle meshes for the geom primitives.

Tessellation degree is fixed (24 segments around, 16 along) so rendered
images are reproducible byte-for-byte across runs.
"""

import math

import numpy as np

from ctrlforge.engine import inertia as inertia_lib

SEGMENTS = 24
RINGS = 16

_cache = {}


def geom_mesh(kind, size):
  """Returns (vertices (n,3), faces (m,3), face_colors or None)."""
  key = (int(kind), tuple(np.round(np.asarray(size, dtype=float), 9)))
  mesh = _cache.get(key)
  if mesh is None:
    mesh = _build(int(kind), np.asarray(size, dtype=float))
    _cache[key] = mesh
  return mesh


def _build(kind, size):
  if kind == inertia_lib.GEOM_SPHERE:
    v, f = _uv_sphere(size[0])
  elif kind == inertia_lib.GEOM_ELLIPSOID:
    v, f = _uv_sphere(1.0)
    v = v * size[None, :3]
  elif kind == inertia_lib.GEOM_BOX:
    v, f = _box(size)
  elif kind == inertia_lib.GEOM_CYLINDER:
    v, f = _cylinder(size[0], size[1])
  elif kind == inertia_lib.GEOM_CAPSULE:
    v, f = _capsule(size[0], size[1])
  elif kind == inertia_lib.GEOM_PLANE:
    return _plane(size)
  else:
    raise ValueError(f'unknown geom kind {kind}')
  return v, f, None


def _uv_sphere(radius):
  verts = [(0.0, 0.0, radius)]
  for ring in range(1, RINGS):
    phi = math.pi * ring / RINGS
    z = radius * math.cos(phi)
    r = radius * math.sin(phi)
    for seg in range(SEGMENTS):
      theta = 2.0 * math.pi * seg / SEGMENTS
      verts.append((r * math.cos(theta), r * math.sin(theta), z))
  verts.append((0.0, 0.0, -radius))
  faces = []
  def ring_start(ring):
    return 1 + (ring - 1) * SEGMENTS
  for seg in range(SEGMENTS):
    nxt = (seg + 1) % SEGMENTS
    faces.append((0, ring_start(1) + seg, ring_start(1) + nxt))
  for ring in range(1, RINGS - 1):
    a, b = ring_start(ring), ring_start(ring + 1)
    for seg in range(SEGMENTS):
      nxt = (seg + 1) % SEGMENTS
      faces.append((a + seg, b + seg, b + nxt))
      faces.append((a + seg, b + nxt, a + nxt))
  last = len(verts) - 1
  a = ring_start(RINGS - 1)
  for seg in range(SEGMENTS):
    nxt = (seg + 1) % SEGMENTS
    faces.append((last, a + nxt, a + seg))
  return np.asarray(verts), np.asarray(faces, dtype=int)


def _box(half):
  hx, hy, hz = half[:3]
  verts = np.array([
      [-hx, -hy, -hz], [hx, -hy, -hz], [hx, hy, -hz], [-hx, hy, -hz],
      [-hx, -hy, hz], [hx, -hy, hz], [hx, hy, hz], [-hx, hy, hz],
  ])
  faces = np.array([
      [0, 2, 1], [0, 3, 2],        # bottom
      [4, 5, 6], [4, 6, 7],        # top
      [0, 1, 5], [0, 5, 4],        # -y
      [2, 3, 7], [2, 7, 6],        # +y
      [1, 2, 6], [1, 6, 5],        # +x
      [3, 0, 4], [3, 4, 7],        # -x
  ], dtype=int)
  return verts, faces


def _disk_cap(radius, z, start_index, flip):
  verts = [(0.0, 0.0, z)]
  for seg in range(SEGMENTS):
    theta = 2.0 * math.pi * seg / SEGMENTS
    verts.append((radius * math.cos(theta), radius * math.sin(theta), z))
  faces = []
  for seg in range(SEGMENTS):
    nxt = (seg + 1) % SEGMENTS
    tri = (start_index, start_index + 1 + seg, start_index + 1 + nxt)
    faces.append(tri[::-1] if flip else tri)
  return verts, faces


def _cylinder(radius, half_length):
  verts = []
  faces = []
  for z in (-half_length, half_length):
    ring = [(radius * math.cos(2 * math.pi * s / SEGMENTS),
             radius * math.sin(2 * math.pi * s / SEGMENTS), z)
            for s in range(SEGMENTS)]
    verts.extend(ring)
  for seg in range(SEGMENTS):
    nxt = (seg + 1) % SEGMENTS
    faces.append((seg, SEGMENTS + seg, SEGMENTS + nxt))
    faces.append((seg, SEGMENTS + nxt, nxt))
  cap_v, cap_f = _disk_cap(radius, -half_length, len(verts), flip=True)
  verts.extend(cap_v)
  faces.extend(cap_f)
  cap_v, cap_f = _disk_cap(radius, half_length, len(verts), flip=False)
  verts.extend(cap_v)
  faces.extend(cap_f)
  return np.asarray(verts), np.asarray(faces, dtype=int)


def _capsule(radius, half_length):
  sphere_v, sphere_f = _uv_sphere(radius)
  verts = sphere_v.copy()
  verts[:, 2] += np.where(sphere_v[:, 2] >= 0, half_length, -half_length)
  return verts, sphere_f


def _plane(size):
  """Checkerable finite rectangle; one quad per checker cell."""
  hx = size[0] if size[0] > 0 else 10.0
  hy = size[1] if size[1] > 0 else 10.0
  cells = 8
  xs = np.linspace(-hx, hx, cells + 1)
  ys = np.linspace(-hy, hy, cells + 1)
  verts = []
  faces = []
  parity = []
  for i in range(cells):
    for j in range(cells):
      base = len(verts)
      verts.extend([(xs[i], ys[j], 0.0), (xs[i + 1], ys[j], 0.0),
                    (xs[i + 1], ys[j + 1], 0.0), (xs[i], ys[j + 1], 0.0)])
      faces.append((base, base + 1, base + 2))
      faces.append((base, base + 2, base + 3))
      parity.extend([(i + j) % 2] * 2)
  return (np.asarray(verts), np.asarray(faces, dtype=int),
          np.asarray(parity, dtype=int))
