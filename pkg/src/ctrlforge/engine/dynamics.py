"""Kinematics and dynamics over a compiled kinematic tree.

Spatial quantities use Pluecker coordinates about the world origin:
motion vectors are [angular(3), linear-velocity-of-the-point-at-origin(3)]
and force vectors are [moment-about-origin(3), force(3)]. Expressing
everything in one frame lets the composite-rigid-body and recursive
Newton-Euler passes run without per-joint coordinate transforms.

The mass matrix comes from the composite-rigid-body algorithm; bias forces
(gravity + Coriolis/centrifugal) from recursive Newton-Euler with zero
acceleration. Forward dynamics solves M(q) qacc = tau - c(q, v) by
Cholesky factorization.
"""

import math

import numpy as np
from scipy import linalg as scipy_linalg

from ctrlforge import errors
from ctrlforge.engine import inertia as inertia_lib
from ctrlforge.engine import model as model_lib
from ctrlforge.engine import rotations


def _cross(a, b):
  return np.array([a[1] * b[2] - a[2] * b[1],
                   a[2] * b[0] - a[0] * b[2],
                   a[0] * b[1] - a[1] * b[0]])


def _cross_motion(v, m):
  """Spatial cross product of motion vectors: v x m."""
  w, vl = v[:3], v[3:]
  mw, ml = m[:3], m[3:]
  return np.concatenate([_cross(w, mw), _cross(w, ml) + _cross(vl, mw)])


def _cross_force(v, f):
  """Dual spatial cross product: v x* f (motion v acting on force f)."""
  w, vl = v[:3], v[3:]
  n, ff = f[:3], f[3:]
  return np.concatenate([_cross(w, n) + _cross(vl, ff), _cross(w, ff)])


# -- position stage -----------------------------------------------------------


def position_stage(model, qpos, data):
  """Forward kinematics: body/geom/site frames and dof motion subspaces."""
  nb = model.nbody
  data.xpos[0] = 0.0
  data.xquat[0] = (1.0, 0.0, 0.0, 0.0)
  data.xmat[0] = np.eye(3)
  for b in range(1, nb):
    parent = model.body_parent[b]
    mat = data.xmat[parent]
    pos = data.xpos[parent] + mat @ model.body_pos[b]
    quat = rotations.quat_mul(data.xquat[parent], model.body_quat[b])
    for j in model.body_jnt[b]:
      mat = rotations.quat_to_mat(quat)
      axis_local = model.jnt_axis[j]
      anchor = pos + mat @ model.jnt_pos[j]
      axis_w = mat @ axis_local
      if model.jnt_type[j] == model_lib.JNT_HINGE:
        joint_quat = rotations.axis_angle_to_quat(axis_local, qpos[j])
        quat = rotations.quat_mul(quat, joint_quat)
        mat = rotations.quat_to_mat(quat)
        pos = anchor - mat @ model.jnt_pos[j]
        data.dof_subspace[j, :3] = axis_w
        data.dof_subspace[j, 3:] = _cross(anchor, axis_w)
      else:
        pos = pos + axis_w * qpos[j]
        data.dof_subspace[j, :3] = 0.0
        data.dof_subspace[j, 3:] = axis_w
    quat = rotations.quat_normalize(quat)
    data.xpos[b] = pos
    data.xquat[b] = quat
    data.xmat[b] = rotations.quat_to_mat(quat)
    data.body_com[b] = pos + data.xmat[b] @ model.body_com[b]
  data.body_com[0] = 0.0
  for g in range(model.ngeom):
    b = model.geom_body[g]
    data.geom_xpos[g] = data.xpos[b] + data.xmat[b] @ model.geom_pos[g]
    data.geom_xmat[g] = data.xmat[b] @ rotations.quat_to_mat(
        model.geom_quat[g])
  for s in range(model.nsite):
    b = model.site_body[s]
    data.site_xpos[s] = data.xpos[b] + data.xmat[b] @ model.site_pos[s]
    data.site_xmat[s] = data.xmat[b] @ rotations.quat_to_mat(
        model.site_quat[s])
  if data.stage < model_lib.STAGE_POSITION:
    data.stage = model_lib.STAGE_POSITION


def write_sensors(model, qpos, qvel, data):
  """State-dependent sensor readings (joint positions and velocities)."""
  for i in range(model.nsensor):
    j = model.sensor_joint[i]
    if model.sensor_kind[i] == model_lib.SENSOR_JOINTPOS:
      data.sensordata[i] = qpos[j]
    else:
      data.sensordata[i] = qvel[j]


# -- spatial inertias -----------------------------------------------------------


def _body_origin_inertias(model, data):
  """Per-body spatial inertia about the world origin as (m, h, I_O).

  h = m * com; I_O = I_com_world + m * ((c . c) eye - c cT). All three are
  additive, so composites accumulate by summation.
  """
  nb = model.nbody
  m = model.body_mass.copy()
  h = np.zeros((nb, 3))
  io = np.zeros((nb, 3, 3))
  eye = np.eye(3)
  for b in range(1, nb):
    if m[b] == 0.0:
      continue
    c = data.body_com[b]
    rot = data.xmat[b]
    ic_world = rot @ model.body_inertia[b] @ rot.T
    h[b] = m[b] * c
    io[b] = ic_world + m[b] * (float(c @ c) * eye - np.outer(c, c))
  return m, h, io


def _apply_inertia(m, h, io, motion):
  w, v = motion[:3], motion[3:]
  return np.concatenate([io @ w + _cross(h, v), m * v - _cross(h, w)])


# -- mass matrix (composite rigid body) ----------------------------------------


def mass_matrix(model, data, out=None):
  """Joint-space mass matrix M(q); requires current forward kinematics."""
  nv = model.nv
  mass = np.zeros((nv, nv)) if out is None else out
  mass[:] = 0.0
  m, h, io = _body_origin_inertias(model, data)
  for b in range(model.nbody - 1, 0, -1):
    parent = model.body_parent[b]
    m[parent] += m[b]
    h[parent] += h[b]
    io[parent] += io[b]
  for j in range(nv):
    body = model.jnt_body[j]
    sj = data.dof_subspace[j]
    force = _apply_inertia(m[body], h[body], io[body], sj)
    mass[j, j] = float(sj @ force)
    i = model.dof_parent[j]
    while i >= 0:
      value = float(data.dof_subspace[i] @ force)
      mass[i, j] = value
      mass[j, i] = value
      i = model.dof_parent[i]
  return mass


# -- inverse dynamics (recursive Newton-Euler) ----------------------------------


def body_velocities(model, data, qvel, out=None):
  """Spatial velocity of each body (Pluecker about the origin)."""
  nb = model.nbody
  vel = data.body_vel if out is None else out
  vel[0] = 0.0
  for b in range(1, nb):
    v = vel[model.body_parent[b]].copy()
    for j in model.body_jnt[b]:
      v += data.dof_subspace[j] * qvel[j]
    vel[b] = v
  return vel


def inverse_dynamics(model, data, qvel, qacc, gravity=True):
  """Generalized forces tau with M qacc + c(q, qvel) = tau.

  With qacc=0 this is the bias force c (gravity + Coriolis/centrifugal);
  with qvel=0 and gravity off, column i of M is recovered from unit
  accelerations. Requires current forward kinematics.
  """
  nb = model.nbody
  mb, hb, iob = _body_origin_inertias(model, data)
  vel = np.zeros((nb, 6))
  acc = np.zeros((nb, 6))
  force = np.zeros((nb, 6))
  if gravity:
    acc[0, 3:] = -model.gravity
  for b in range(1, nb):
    parent = model.body_parent[b]
    v = vel[parent].copy()
    a = acc[parent].copy()
    for j in model.body_jnt[b]:
      sj = data.dof_subspace[j]
      vj = sj * qvel[j]
      a += sj * qacc[j] + _cross_motion(v, vj)
      v += vj
    vel[b] = v
    acc[b] = a
    if mb[b] != 0.0:
      iv = _apply_inertia(mb[b], hb[b], iob[b], v)
      force[b] = _apply_inertia(mb[b], hb[b], iob[b], a) + _cross_force(v, iv)
  for b in range(nb - 1, 0, -1):
    force[model.body_parent[b]] += force[b]
  tau = np.zeros(model.nv)
  for j in range(model.nv):
    tau[j] = float(data.dof_subspace[j] @ force[model.jnt_body[j]])
  return tau


def bias_forces(model, data, qvel):
  """Gravity + Coriolis/centrifugal generalized forces c(q, v)."""
  return inverse_dynamics(model, data, qvel, np.zeros(model.nv),
                          gravity=True)


# -- applied forces -------------------------------------------------------------


def clamp_ctrl(model, ctrl):
  if not model.nu:
    return ctrl
  clamped = np.array(ctrl, dtype=float)
  limited = model.act_ctrllimited
  if limited.any():
    clamped[limited] = np.clip(clamped[limited],
                               model.act_ctrlrange[limited, 0],
                               model.act_ctrlrange[limited, 1])
  return clamped


def actuation_forces(model, qpos, qvel, ctrl, data=None):
  """Generalized forces from actuators; ctrl is clamped to its range."""
  tau = np.zeros(model.nv)
  forces = np.zeros(model.nu)
  ctrl = clamp_ctrl(model, ctrl)
  for u in range(model.nu):
    j = model.act_joint[u]
    if model.act_kind[u] == model_lib.ACT_MOTOR:
      force = model.act_gear[u] * ctrl[u]
    else:
      force = (model.act_kp[u] * (ctrl[u] - qpos[j])
               - model.act_kv[u] * qvel[j])
    forces[u] = force
    tau[j] += force
  if data is not None:
    data.actuator_force[:] = forces
  return tau


def passive_forces(model, qpos, qvel):
  """Joint damping and spring forces."""
  return (-model.jnt_damping * qvel
          - model.jnt_stiffness * (qpos - model.jnt_springref))


_DRAG_AXES = np.eye(3)


def _geom_drag_areas(kind, size):
  """Projected area of a geom along each of its local axes."""
  r = size[0]
  if kind == inertia_lib.GEOM_SPHERE:
    a = math.pi * r * r
    return (a, a, a)
  if kind in (inertia_lib.GEOM_CAPSULE, inertia_lib.GEOM_CYLINDER):
    length = 2.0 * size[1]
    side = 2.0 * r * length
    if kind == inertia_lib.GEOM_CAPSULE:
      side += math.pi * r * r
    return (side, side, math.pi * r * r)
  if kind == inertia_lib.GEOM_BOX:
    hx, hy, hz = size
    return (4.0 * hy * hz, 4.0 * hx * hz, 4.0 * hx * hy)
  if kind == inertia_lib.GEOM_ELLIPSOID:
    a, b, c = size
    return (math.pi * b * c, math.pi * a * c, math.pi * a * b)
  return (0.0, 0.0, 0.0)  # plane


def fluid_drag(model, data, qvel):
  """Quadratic anisotropic fluid drag, projected to generalized forces.

  Per geom and local axis k: F_k = -1/2 rho C A_k |v_k| v_k, where A_k is
  the geom's projected area along that axis. Zero when the model's fluid
  density option is zero.
  """
  tau = np.zeros(model.nv)
  rho = model.fluid_density
  if rho == 0.0 or model.ngeom == 0:
    return tau
  body_velocities(model, data, qvel)
  for g in range(model.ngeom):
    coef = model.geom_fluidcoef[g]
    b = model.geom_body[g]
    if coef == 0.0 or model.body_last_dof[b] < 0:
      continue
    areas = _geom_drag_areas(model.geom_type[g], model.geom_size[g])
    if areas[0] == areas[1] == areas[2] == 0.0:
      continue
    w = data.body_vel[b, :3]
    v_origin = data.body_vel[b, 3:]
    p = data.geom_xpos[g]
    v_point = v_origin + _cross(w, p)
    rot = data.geom_xmat[g]
    v_local = rot.T @ v_point
    f_local = np.array([
        -0.5 * rho * coef * areas[k] * abs(v_local[k]) * v_local[k]
        for k in range(3)])
    f_world = rot @ f_local
    spatial = np.concatenate([_cross(p, f_world), f_world])
    i = model.body_last_dof[b]
    while i >= 0:
      tau[i] += float(data.dof_subspace[i] @ spatial)
      i = model.dof_parent[i]
  return tau


def apply_point_force(model, data, body_index, force, point, tau):
  """Adds the generalized effect of a world-frame force at a world point."""
  spatial = np.concatenate([_cross(point, force), np.asarray(force,
                                                             dtype=float)])
  i = model.body_last_dof[body_index]
  while i >= 0:
    tau[i] += float(data.dof_subspace[i] @ spatial)
    i = model.dof_parent[i]


# -- forward dynamics -----------------------------------------------------------


def dynamics_stage(model, data, qpos, qvel, ctrl, applied=None):
  """Forces, accelerations and energy at the current kinematic stage."""
  data.qbias[:] = bias_forces(model, data, qvel)
  data.qfrc_actuator[:] = actuation_forces(model, qpos, qvel, ctrl, data)
  data.qfrc_passive[:] = passive_forces(model, qpos, qvel)
  data.qfrc_drag[:] = fluid_drag(model, data, qvel)
  data.qfrc_applied[:] = 0.0 if applied is None else applied
  mass_matrix(model, data, out=data.qmass)
  tau = (data.qfrc_actuator + data.qfrc_passive + data.qfrc_drag
         + data.qfrc_applied)
  data.qacc[:] = solve_mass(data.qmass, tau - data.qbias)
  energy(model, data, qpos, qvel)
  data.stage = model_lib.STAGE_FULL
  return data.qacc


def solve_mass(mass, rhs):
  try:
    chol = scipy_linalg.cho_factor(mass, lower=True, check_finite=False)
  except scipy_linalg.LinAlgError as e:
    raise errors.Error(
        'internal error: mass matrix is not positive definite '
        f'({e})') from None
  return scipy_linalg.cho_solve(chol, rhs, check_finite=False)


def qacc_at(model, data, qpos, qvel, ctrl, applied=None):
  """Acceleration at an arbitrary state (runs FK into `data`)."""
  position_stage(model, qpos, data)
  data.qbias[:] = bias_forces(model, data, qvel)
  tau = (actuation_forces(model, qpos, qvel, ctrl)
         + passive_forces(model, qpos, qvel)
         + fluid_drag(model, data, qvel))
  if applied is not None:
    tau = tau + applied
  mass_matrix(model, data, out=data.qmass)
  return solve_mass(data.qmass, tau - data.qbias)


def energy(model, data, qpos, qvel):
  """(potential, kinetic) energy; requires current FK and mass matrix."""
  potential = 0.0
  for b in range(1, model.nbody):
    potential -= model.body_mass[b] * float(model.gravity
                                            @ data.body_com[b])
  potential += 0.5 * float(
      model.jnt_stiffness @ (qpos - model.jnt_springref)**2)
  kinetic = 0.5 * float(qvel @ (data.qmass @ qvel))
  data.energy[0] = potential
  data.energy[1] = kinetic
  return potential, kinetic
