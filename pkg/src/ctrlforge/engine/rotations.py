"""Quaternion and rotation-matrix utilities.

Quaternions are (w, x, y, z), unit norm. Euler angles compose extrinsically
about the fixed world axes in X, Y, Z order, matching the `euler` attribute
semantics of the model format.
"""

import math

import numpy as np

from ctrlforge import errors


def quat_normalize(q):
  q = np.asarray(q, dtype=float)
  norm = math.sqrt(float(q @ q))
  if norm == 0.0:
    raise errors.Error('cannot normalize a zero quaternion')
  return q / norm


def quat_to_mat(q):
  """Rotation matrix of a quaternion (normalized internally)."""
  w, x, y, z = quat_normalize(q)
  xx, yy, zz = x * x, y * y, z * z
  xy, xz, yz = x * y, x * z, y * z
  wx, wy, wz = w * x, w * y, w * z
  return np.array([
      [1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)],
      [2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)],
      [2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)],
  ])


def mat_to_quat(m):
  """Quaternion of a proper rotation matrix (w >= 0)."""
  m = np.asarray(m, dtype=float)
  trace = m[0, 0] + m[1, 1] + m[2, 2]
  if trace > 0:
    s = math.sqrt(trace + 1.0) * 2
    q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s,
                  (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
  elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
    s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
    q = np.array([(m[2, 1] - m[1, 2]) / s, 0.25 * s,
                  (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s])
  elif m[1, 1] > m[2, 2]:
    s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
    q = np.array([(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
                  0.25 * s, (m[1, 2] + m[2, 1]) / s])
  else:
    s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
    q = np.array([(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                  (m[1, 2] + m[2, 1]) / s, 0.25 * s])
  if q[0] < 0:
    q = -q
  return quat_normalize(q)


def quat_mul(a, b):
  aw, ax, ay, az = a
  bw, bx, by, bz = b
  return np.array([
      aw * bw - ax * bx - ay * by - az * bz,
      aw * bx + ax * bw + ay * bz - az * by,
      aw * by - ax * bz + ay * bw + az * bx,
      aw * bz + ax * by - ay * bx + az * bw,
  ])


def quat_rotate(q, v):
  """Rotates vector `v` by quaternion `q`."""
  w, x, y, z = q
  u = np.array([x, y, z])
  uv = np.cross(u, v)
  return np.asarray(v, dtype=float) + 2.0 * (w * uv + np.cross(u, uv))


def axis_angle_to_quat(axis, angle):
  axis = np.asarray(axis, dtype=float)
  norm = math.sqrt(float(axis @ axis))
  if norm == 0.0:
    raise errors.Error('rotation axis must be non-zero')
  half = 0.5 * angle
  s = math.sin(half) / norm
  return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def euler_to_quat(angles, degrees=False):
  """Unit quaternion for extrinsic X-Y-Z euler angles."""
  rx, ry, rz = np.asarray(angles, dtype=float)
  if degrees:
    rx, ry, rz = math.radians(rx), math.radians(ry), math.radians(rz)
  qx = np.array([math.cos(rx / 2), math.sin(rx / 2), 0.0, 0.0])
  qy = np.array([math.cos(ry / 2), 0.0, math.sin(ry / 2), 0.0])
  qz = np.array([math.cos(rz / 2), 0.0, 0.0, math.sin(rz / 2)])
  # Extrinsic X, then Y, then Z: R = Rz Ry Rx.
  return quat_mul(qz, quat_mul(qy, qx))


def quat_between_vectors(a, b):
  """Minimal rotation taking direction `a` onto direction `b`."""
  a = np.asarray(a, dtype=float)
  b = np.asarray(b, dtype=float)
  a = a / math.sqrt(float(a @ a))
  b = b / math.sqrt(float(b @ b))
  c = np.cross(a, b)
  d = float(a @ b)
  if d < -1 + 1e-12:
    # Antiparallel: rotate pi about any axis orthogonal to a.
    ortho = np.cross(a, [1.0, 0.0, 0.0])
    if float(ortho @ ortho) < 1e-12:
      ortho = np.cross(a, [0.0, 1.0, 0.0])
    return axis_angle_to_quat(ortho, math.pi)
  q = np.array([1.0 + d, c[0], c[1], c[2]])
  return quat_normalize(q)
