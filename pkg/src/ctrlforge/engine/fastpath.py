"""JIT-compiled stepping kernels mirroring the reference dynamics.

The kernels implement the same forward-kinematics / composite-rigid-body /
recursive-Newton-Euler pipeline as `dynamics.py`, flattened over the
compiled model's arrays, and are used by the simulation facade to run the
per-substep loop at native speed. The pure-numpy implementation remains
the reference: tests cross-check both paths, and everything works (slower)
when numba is unavailable or CTRLFORGE_PURE_PYTHON=1 is set.
"""

import collections
import os
import weakref

import numpy as np

try:
  if os.environ.get('CTRLFORGE_PURE_PYTHON', '') not in ('', '0'):
    raise ImportError('pure-python mode forced')
  from numba import njit
  AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via env var
  AVAILABLE = False

  def njit(*args, **kwargs):
    del kwargs
    def wrap(f):
      return f
    if args and callable(args[0]):
      return args[0]
    return wrap


FastModel = collections.namedtuple('FastModel', [
    'nbody', 'nv', 'nu', 'ngeom', 'nsite',
    'body_parent', 'body_pos', 'body_quat', 'body_jntadr', 'body_jntnum',
    'body_mass', 'body_com', 'body_inertia', 'body_last_dof',
    'jnt_body', 'jnt_type', 'jnt_axis', 'jnt_pos',
    'jnt_damping', 'jnt_stiffness', 'jnt_springref',
    'dof_parent',
    'geom_body', 'geom_pos', 'geom_mat', 'geom_type_area',
    'geom_fluidcoef',
    'site_body', 'site_pos', 'site_mat',
    'act_kind', 'act_joint', 'act_gear', 'act_kp', 'act_kv',
    'act_ctrlrange',
    'gravity', 'timestep', 'fluid_density', 'use_rk4',
])

_cache = weakref.WeakKeyDictionary()


def fast_model(model):
  """Flat-array view of a CompiledModel for the kernels (cached)."""
  cached = _cache.get(model)
  if cached is not None:
    return cached
  from ctrlforge.engine import dynamics, rotations
  geom_mat = np.stack([rotations.quat_to_mat(q) for q in model.geom_quat]) \
      if model.ngeom else np.zeros((0, 3, 3))
  site_mat = np.stack([rotations.quat_to_mat(q) for q in model.site_quat]) \
      if model.nsite else np.zeros((0, 3, 3))
  areas = np.zeros((model.ngeom, 3))
  for g in range(model.ngeom):
    areas[g] = dynamics._geom_drag_areas(model.geom_type[g],
                                         model.geom_size[g])
  fm = FastModel(
      nbody=model.nbody, nv=model.nv, nu=model.nu, ngeom=model.ngeom,
      nsite=model.nsite,
      body_parent=model.body_parent, body_pos=model.body_pos,
      body_quat=model.body_quat, body_jntadr=model.body_jntadr,
      body_jntnum=model.body_jntnum, body_mass=model.body_mass,
      body_com=model.body_com, body_inertia=model.body_inertia,
      body_last_dof=model.body_last_dof,
      jnt_body=model.jnt_body, jnt_type=model.jnt_type,
      jnt_axis=model.jnt_axis, jnt_pos=model.jnt_pos,
      jnt_damping=model.jnt_damping, jnt_stiffness=model.jnt_stiffness,
      jnt_springref=model.jnt_springref,
      dof_parent=model.dof_parent,
      geom_body=model.geom_body, geom_pos=model.geom_pos,
      geom_mat=geom_mat, geom_type_area=areas,
      geom_fluidcoef=model.geom_fluidcoef,
      site_body=model.site_body, site_pos=model.site_pos,
      site_mat=site_mat,
      act_kind=model.act_kind, act_joint=model.act_joint,
      act_gear=model.act_gear, act_kp=model.act_kp, act_kv=model.act_kv,
      act_ctrlrange=model.act_ctrlrange,
      gravity=model.gravity, timestep=model.timestep,
      fluid_density=model.fluid_density,
      use_rk4=model.integrator == 'rk4',
  )
  _cache[model] = fm
  return fm


class Workspace:
  """Preallocated kernel scratch arrays for one simulation."""

  def __init__(self, model):
    nb, nv = model.nbody, model.nv
    self.xpos = np.zeros((nb, 3))
    self.xquat = np.zeros((nb, 4))
    self.xmat = np.zeros((nb, 3, 3))
    self.body_com_w = np.zeros((nb, 3))
    self.geom_xpos = np.zeros((model.ngeom, 3))
    self.geom_xmat = np.zeros((model.ngeom, 3, 3))
    self.site_xpos = np.zeros((model.nsite, 3))
    self.site_xmat = np.zeros((model.nsite, 3, 3))
    self.dof_s = np.zeros((nv, 6))
    self.comp_m = np.zeros(nb)
    self.comp_h = np.zeros((nb, 3))
    self.comp_io = np.zeros((nb, 3, 3))
    self.body_vel = np.zeros((nb, 6))
    self.body_acc = np.zeros((nb, 6))
    self.body_frc = np.zeros((nb, 6))
    self.qmass = np.zeros((nv, nv))
    self.chol = np.zeros((nv, nv))
    self.qacc = np.zeros(nv)
    self.tau = np.zeros(nv)
    self.bias = np.zeros(nv)
    self.actuator_force = np.zeros(model.nu)
    self.k = np.zeros((8, nv))  # rk4 stage buffers (q and v rows)
    self.qtmp = np.zeros(nv)
    self.vtmp = np.zeros(nv)
    self.qacc_transition = np.zeros(nv)
    self.act_force_transition = np.zeros(model.nu)


@njit(cache=True)
def _quat_to_mat(q, out):
  w, x, y, z = q[0], q[1], q[2], q[3]
  n = (w * w + x * x + y * y + z * z) ** 0.5
  w, x, y, z = w / n, x / n, y / n, z / n
  out[0, 0] = 1 - 2 * (y * y + z * z)
  out[0, 1] = 2 * (x * y - w * z)
  out[0, 2] = 2 * (x * z + w * y)
  out[1, 0] = 2 * (x * y + w * z)
  out[1, 1] = 1 - 2 * (x * x + z * z)
  out[1, 2] = 2 * (y * z - w * x)
  out[2, 0] = 2 * (x * z - w * y)
  out[2, 1] = 2 * (y * z + w * x)
  out[2, 2] = 1 - 2 * (x * x + y * y)


@njit(cache=True)
def _fk(fm, qpos, xpos, xquat, xmat, body_com_w, geom_xpos, geom_xmat,
        site_xpos, site_xmat, dof_s):
  nb = fm.nbody
  xpos[0, :] = 0.0
  xquat[0, 0] = 1.0
  xquat[0, 1:] = 0.0
  for i in range(3):
    for j in range(3):
      xmat[0, i, j] = 1.0 if i == j else 0.0
  body_com_w[0, :] = 0.0
  mat = np.zeros((3, 3))
  quat = np.zeros(4)
  tmp3 = np.zeros(3)
  qloc = np.zeros(4)
  qnew = np.zeros(4)
  for b in range(1, nb):
    p = fm.body_parent[b]
    # pos = xpos[p] + xmat[p] @ body_pos[b]; quat = xquat[p] * body_quat[b]
    for i in range(3):
      xpos[b, i] = (xpos[p, i] + xmat[p, i, 0] * fm.body_pos[b, 0]
                    + xmat[p, i, 1] * fm.body_pos[b, 1]
                    + xmat[p, i, 2] * fm.body_pos[b, 2])
    aw, ax, ay, az = xquat[p, 0], xquat[p, 1], xquat[p, 2], xquat[p, 3]
    bw, bx, by, bz = (fm.body_quat[b, 0], fm.body_quat[b, 1],
                      fm.body_quat[b, 2], fm.body_quat[b, 3])
    quat[0] = aw * bw - ax * bx - ay * by - az * bz
    quat[1] = aw * bx + ax * bw + ay * bz - az * by
    quat[2] = aw * by - ax * bz + ay * bw + az * bx
    quat[3] = aw * bz + ax * by - ay * bx + az * bw
    jadr = fm.body_jntadr[b]
    for k in range(fm.body_jntnum[b]):
      j = jadr + k
      _quat_to_mat(quat, mat)
      # world anchor and axis
      ax0 = (mat[0, 0] * fm.jnt_axis[j, 0] + mat[0, 1] * fm.jnt_axis[j, 1]
             + mat[0, 2] * fm.jnt_axis[j, 2])
      ax1 = (mat[1, 0] * fm.jnt_axis[j, 0] + mat[1, 1] * fm.jnt_axis[j, 1]
             + mat[1, 2] * fm.jnt_axis[j, 2])
      ax2 = (mat[2, 0] * fm.jnt_axis[j, 0] + mat[2, 1] * fm.jnt_axis[j, 1]
             + mat[2, 2] * fm.jnt_axis[j, 2])
      an0 = xpos[b, 0] + (mat[0, 0] * fm.jnt_pos[j, 0]
                          + mat[0, 1] * fm.jnt_pos[j, 1]
                          + mat[0, 2] * fm.jnt_pos[j, 2])
      an1 = xpos[b, 1] + (mat[1, 0] * fm.jnt_pos[j, 0]
                          + mat[1, 1] * fm.jnt_pos[j, 1]
                          + mat[1, 2] * fm.jnt_pos[j, 2])
      an2 = xpos[b, 2] + (mat[2, 0] * fm.jnt_pos[j, 0]
                          + mat[2, 1] * fm.jnt_pos[j, 1]
                          + mat[2, 2] * fm.jnt_pos[j, 2])
      if fm.jnt_type[j] == 0:  # hinge
        half = 0.5 * qpos[j]
        s = np.sin(half)
        c = np.cos(half)
        qloc[0] = c
        qloc[1] = s * fm.jnt_axis[j, 0]
        qloc[2] = s * fm.jnt_axis[j, 1]
        qloc[3] = s * fm.jnt_axis[j, 2]
        aw, ax_, ay_, az_ = quat[0], quat[1], quat[2], quat[3]
        qnew[0] = aw * qloc[0] - ax_ * qloc[1] - ay_ * qloc[2] - az_ * qloc[3]
        qnew[1] = aw * qloc[1] + ax_ * qloc[0] + ay_ * qloc[3] - az_ * qloc[2]
        qnew[2] = aw * qloc[2] - ax_ * qloc[3] + ay_ * qloc[0] + az_ * qloc[1]
        qnew[3] = aw * qloc[3] + ax_ * qloc[2] - ay_ * qloc[1] + az_ * qloc[0]
        quat[:] = qnew
        _quat_to_mat(quat, mat)
        xpos[b, 0] = an0 - (mat[0, 0] * fm.jnt_pos[j, 0]
                            + mat[0, 1] * fm.jnt_pos[j, 1]
                            + mat[0, 2] * fm.jnt_pos[j, 2])
        xpos[b, 1] = an1 - (mat[1, 0] * fm.jnt_pos[j, 0]
                            + mat[1, 1] * fm.jnt_pos[j, 1]
                            + mat[1, 2] * fm.jnt_pos[j, 2])
        xpos[b, 2] = an2 - (mat[2, 0] * fm.jnt_pos[j, 0]
                            + mat[2, 1] * fm.jnt_pos[j, 1]
                            + mat[2, 2] * fm.jnt_pos[j, 2])
        dof_s[j, 0] = ax0
        dof_s[j, 1] = ax1
        dof_s[j, 2] = ax2
        dof_s[j, 3] = an1 * ax2 - an2 * ax1
        dof_s[j, 4] = an2 * ax0 - an0 * ax2
        dof_s[j, 5] = an0 * ax1 - an1 * ax0
      else:  # slide
        xpos[b, 0] += ax0 * qpos[j]
        xpos[b, 1] += ax1 * qpos[j]
        xpos[b, 2] += ax2 * qpos[j]
        dof_s[j, 0] = 0.0
        dof_s[j, 1] = 0.0
        dof_s[j, 2] = 0.0
        dof_s[j, 3] = ax0
        dof_s[j, 4] = ax1
        dof_s[j, 5] = ax2
    n = (quat[0]**2 + quat[1]**2 + quat[2]**2 + quat[3]**2) ** 0.5
    for i in range(4):
      xquat[b, i] = quat[i] / n
    _quat_to_mat(xquat[b], xmat[b])
    for i in range(3):
      body_com_w[b, i] = xpos[b, i] + (xmat[b, i, 0] * fm.body_com[b, 0]
                                       + xmat[b, i, 1] * fm.body_com[b, 1]
                                       + xmat[b, i, 2] * fm.body_com[b, 2])
  for g in range(fm.ngeom):
    b = fm.geom_body[g]
    for i in range(3):
      geom_xpos[g, i] = xpos[b, i] + (xmat[b, i, 0] * fm.geom_pos[g, 0]
                                      + xmat[b, i, 1] * fm.geom_pos[g, 1]
                                      + xmat[b, i, 2] * fm.geom_pos[g, 2])
      for jj in range(3):
        geom_xmat[g, i, jj] = (xmat[b, i, 0] * fm.geom_mat[g, 0, jj]
                               + xmat[b, i, 1] * fm.geom_mat[g, 1, jj]
                               + xmat[b, i, 2] * fm.geom_mat[g, 2, jj])
  for s in range(fm.nsite):
    b = fm.site_body[s]
    for i in range(3):
      site_xpos[s, i] = xpos[b, i] + (xmat[b, i, 0] * fm.site_pos[s, 0]
                                      + xmat[b, i, 1] * fm.site_pos[s, 1]
                                      + xmat[b, i, 2] * fm.site_pos[s, 2])
      for jj in range(3):
        site_xmat[s, i, jj] = (xmat[b, i, 0] * fm.site_mat[s, 0, jj]
                               + xmat[b, i, 1] * fm.site_mat[s, 1, jj]
                               + xmat[b, i, 2] * fm.site_mat[s, 2, jj])


@njit(cache=True)
def _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat, body_com_w,
          geom_xpos, geom_xmat, site_xpos, site_xmat, dof_s,
          comp_m, comp_h, comp_io, body_vel, body_acc, body_frc,
          qmass, chol, tau, bias, actuator_force, qacc):
  """Full dynamics evaluation; fills qmass/bias/tau/qacc. Returns 0 on
  success, 1 if the mass matrix was not positive definite."""
  nb, nv = fm.nbody, fm.nv
  _fk(fm, qpos, xpos, xquat, xmat, body_com_w, geom_xpos, geom_xmat,
      site_xpos, site_xmat, dof_s)

  # Per-body spatial inertia about the origin: (m, h = m c, I_O).
  for b in range(nb):
    m = fm.body_mass[b]
    comp_m[b] = m
    if m == 0.0:
      comp_h[b, :] = 0.0
      comp_io[b, :, :] = 0.0
      continue
    c0, c1, c2 = body_com_w[b, 0], body_com_w[b, 1], body_com_w[b, 2]
    comp_h[b, 0] = m * c0
    comp_h[b, 1] = m * c1
    comp_h[b, 2] = m * c2
    cc = c0 * c0 + c1 * c1 + c2 * c2
    for i in range(3):
      for j in range(3):
        # R I_local R^T
        acc = 0.0
        for k in range(3):
          rik = xmat[b, i, k]
          for l in range(3):
            acc += rik * fm.body_inertia[b, k, l] * xmat[b, j, l]
        ci = body_com_w[b, i]
        cj = body_com_w[b, j]
        shift = m * ((cc if i == j else 0.0) - ci * cj)
        comp_io[b, i, j] = acc + shift

  # RNEA with qacc = 0: bias forces (gravity + velocity products).
  body_vel[0, :] = 0.0
  body_acc[0, :3] = 0.0
  body_acc[0, 3] = -fm.gravity[0]
  body_acc[0, 4] = -fm.gravity[1]
  body_acc[0, 5] = -fm.gravity[2]
  for b in range(1, nb):
    p = fm.body_parent[b]
    for i in range(6):
      body_vel[b, i] = body_vel[p, i]
      body_acc[b, i] = body_acc[p, i]
    jadr = fm.body_jntadr[b]
    for k in range(fm.body_jntnum[b]):
      j = jadr + k
      qd = qvel[j]
      # a += v x (S qd)  (using v before adding this joint's contribution
      # gives the same result as using v after, since (S qd) x (S qd) = 0)
      w0, w1, w2 = body_vel[b, 0], body_vel[b, 1], body_vel[b, 2]
      l0, l1, l2 = body_vel[b, 3], body_vel[b, 4], body_vel[b, 5]
      m0, m1, m2 = dof_s[j, 0] * qd, dof_s[j, 1] * qd, dof_s[j, 2] * qd
      m3, m4, m5 = dof_s[j, 3] * qd, dof_s[j, 4] * qd, dof_s[j, 5] * qd
      body_acc[b, 0] += w1 * m2 - w2 * m1
      body_acc[b, 1] += w2 * m0 - w0 * m2
      body_acc[b, 2] += w0 * m1 - w1 * m0
      body_acc[b, 3] += w1 * m5 - w2 * m4 + l1 * m2 - l2 * m1
      body_acc[b, 4] += w2 * m3 - w0 * m5 + l2 * m0 - l0 * m2
      body_acc[b, 5] += w0 * m4 - w1 * m3 + l0 * m1 - l1 * m0
      for i in range(6):
        body_vel[b, i] += dof_s[j, i] * qd
    # f = I a + v x* (I v)
    if comp_m[b] == 0.0:
      body_frc[b, :] = 0.0
      continue
    iw0 = (comp_io[b, 0, 0] * body_vel[b, 0]
           + comp_io[b, 0, 1] * body_vel[b, 1]
           + comp_io[b, 0, 2] * body_vel[b, 2]
           + comp_h[b, 1] * body_vel[b, 5] - comp_h[b, 2] * body_vel[b, 4])
    iw1 = (comp_io[b, 1, 0] * body_vel[b, 0]
           + comp_io[b, 1, 1] * body_vel[b, 1]
           + comp_io[b, 1, 2] * body_vel[b, 2]
           + comp_h[b, 2] * body_vel[b, 3] - comp_h[b, 0] * body_vel[b, 5])
    iw2 = (comp_io[b, 2, 0] * body_vel[b, 0]
           + comp_io[b, 2, 1] * body_vel[b, 1]
           + comp_io[b, 2, 2] * body_vel[b, 2]
           + comp_h[b, 0] * body_vel[b, 4] - comp_h[b, 1] * body_vel[b, 3])
    if0 = (comp_m[b] * body_vel[b, 3]
           - (comp_h[b, 1] * body_vel[b, 2] - comp_h[b, 2] * body_vel[b, 1]))
    if1 = (comp_m[b] * body_vel[b, 4]
           - (comp_h[b, 2] * body_vel[b, 0] - comp_h[b, 0] * body_vel[b, 2]))
    if2 = (comp_m[b] * body_vel[b, 5]
           - (comp_h[b, 0] * body_vel[b, 1] - comp_h[b, 1] * body_vel[b, 0]))
    aw0 = (comp_io[b, 0, 0] * body_acc[b, 0]
           + comp_io[b, 0, 1] * body_acc[b, 1]
           + comp_io[b, 0, 2] * body_acc[b, 2]
           + comp_h[b, 1] * body_acc[b, 5] - comp_h[b, 2] * body_acc[b, 4])
    aw1 = (comp_io[b, 1, 0] * body_acc[b, 0]
           + comp_io[b, 1, 1] * body_acc[b, 1]
           + comp_io[b, 1, 2] * body_acc[b, 2]
           + comp_h[b, 2] * body_acc[b, 3] - comp_h[b, 0] * body_acc[b, 5])
    aw2 = (comp_io[b, 2, 0] * body_acc[b, 0]
           + comp_io[b, 2, 1] * body_acc[b, 1]
           + comp_io[b, 2, 2] * body_acc[b, 2]
           + comp_h[b, 0] * body_acc[b, 4] - comp_h[b, 1] * body_acc[b, 3])
    af0 = (comp_m[b] * body_acc[b, 3]
           - (comp_h[b, 1] * body_acc[b, 2] - comp_h[b, 2] * body_acc[b, 1]))
    af1 = (comp_m[b] * body_acc[b, 4]
           - (comp_h[b, 2] * body_acc[b, 0] - comp_h[b, 0] * body_acc[b, 2]))
    af2 = (comp_m[b] * body_acc[b, 5]
           - (comp_h[b, 0] * body_acc[b, 1] - comp_h[b, 1] * body_acc[b, 0]))
    w0, w1, w2 = body_vel[b, 0], body_vel[b, 1], body_vel[b, 2]
    l0, l1, l2 = body_vel[b, 3], body_vel[b, 4], body_vel[b, 5]
    body_frc[b, 0] = aw0 + (w1 * iw2 - w2 * iw1) + (l1 * if2 - l2 * if1)
    body_frc[b, 1] = aw1 + (w2 * iw0 - w0 * iw2) + (l2 * if0 - l0 * if2)
    body_frc[b, 2] = aw2 + (w0 * iw1 - w1 * iw0) + (l0 * if1 - l1 * if0)
    body_frc[b, 3] = af0 + (w1 * if2 - w2 * if1)
    body_frc[b, 4] = af1 + (w2 * if0 - w0 * if2)
    body_frc[b, 5] = af2 + (w0 * if1 - w1 * if0)
  for b in range(nb - 1, 0, -1):
    p = fm.body_parent[b]
    for i in range(6):
      body_frc[p, i] += body_frc[b, i]
  for j in range(nv):
    bj = fm.jnt_body[j]
    s = 0.0
    for i in range(6):
      s += dof_s[j, i] * body_frc[bj, i]
    bias[j] = s

  # Applied generalized forces: actuation + passive + drag + external.
  for j in range(nv):
    tau[j] = (applied[j] - fm.jnt_damping[j] * qvel[j]
              - fm.jnt_stiffness[j] * (qpos[j] - fm.jnt_springref[j]))
  for u in range(fm.nu):
    c = ctrl[u]
    lo = fm.act_ctrlrange[u, 0]
    hi = fm.act_ctrlrange[u, 1]
    if c < lo:
      c = lo
    elif c > hi:
      c = hi
    j = fm.act_joint[u]
    if fm.act_kind[u] == 0:
      force = fm.act_gear[u] * c
    else:
      force = fm.act_kp[u] * (c - qpos[j]) - fm.act_kv[u] * qvel[j]
    actuator_force[u] = force
    tau[j] += force
  if fm.fluid_density != 0.0:
    rho = fm.fluid_density
    for g in range(fm.ngeom):
      b = fm.geom_body[g]
      coef = fm.geom_fluidcoef[g]
      if coef == 0.0 or fm.body_last_dof[b] < 0:
        continue
      a0 = fm.geom_type_area[g, 0]
      a1 = fm.geom_type_area[g, 1]
      a2 = fm.geom_type_area[g, 2]
      if a0 == 0.0 and a1 == 0.0 and a2 == 0.0:
        continue
      w0, w1, w2 = body_vel[b, 0], body_vel[b, 1], body_vel[b, 2]
      p0, p1, p2 = geom_xpos[g, 0], geom_xpos[g, 1], geom_xpos[g, 2]
      vp0 = body_vel[b, 3] + w1 * p2 - w2 * p1
      vp1 = body_vel[b, 4] + w2 * p0 - w0 * p2
      vp2 = body_vel[b, 5] + w0 * p1 - w1 * p0
      vl0 = (geom_xmat[g, 0, 0] * vp0 + geom_xmat[g, 1, 0] * vp1
             + geom_xmat[g, 2, 0] * vp2)
      vl1 = (geom_xmat[g, 0, 1] * vp0 + geom_xmat[g, 1, 1] * vp1
             + geom_xmat[g, 2, 1] * vp2)
      vl2 = (geom_xmat[g, 0, 2] * vp0 + geom_xmat[g, 1, 2] * vp1
             + geom_xmat[g, 2, 2] * vp2)
      fl0 = -0.5 * rho * coef * a0 * abs(vl0) * vl0
      fl1 = -0.5 * rho * coef * a1 * abs(vl1) * vl1
      fl2 = -0.5 * rho * coef * a2 * abs(vl2) * vl2
      fw0 = (geom_xmat[g, 0, 0] * fl0 + geom_xmat[g, 0, 1] * fl1
             + geom_xmat[g, 0, 2] * fl2)
      fw1 = (geom_xmat[g, 1, 0] * fl0 + geom_xmat[g, 1, 1] * fl1
             + geom_xmat[g, 1, 2] * fl2)
      fw2 = (geom_xmat[g, 2, 0] * fl0 + geom_xmat[g, 2, 1] * fl1
             + geom_xmat[g, 2, 2] * fl2)
      n0 = p1 * fw2 - p2 * fw1
      n1 = p2 * fw0 - p0 * fw2
      n2 = p0 * fw1 - p1 * fw0
      i = fm.body_last_dof[b]
      while i >= 0:
        tau[i] += (dof_s[i, 0] * n0 + dof_s[i, 1] * n1 + dof_s[i, 2] * n2
                   + dof_s[i, 3] * fw0 + dof_s[i, 4] * fw1
                   + dof_s[i, 5] * fw2)
        i = fm.dof_parent[i]

  # Composite rigid body: M(q).
  for b in range(nb - 1, 0, -1):
    p = fm.body_parent[b]
    comp_m[p] += comp_m[b]
    for i in range(3):
      comp_h[p, i] += comp_h[b, i]
      for jj in range(3):
        comp_io[p, i, jj] += comp_io[b, i, jj]
  for j in range(nv):
    bj = fm.jnt_body[j]
    sw0, sw1, sw2 = dof_s[j, 0], dof_s[j, 1], dof_s[j, 2]
    sl0, sl1, sl2 = dof_s[j, 3], dof_s[j, 4], dof_s[j, 5]
    fn0 = (comp_io[bj, 0, 0] * sw0 + comp_io[bj, 0, 1] * sw1
           + comp_io[bj, 0, 2] * sw2 + comp_h[bj, 1] * sl2
           - comp_h[bj, 2] * sl1)
    fn1 = (comp_io[bj, 1, 0] * sw0 + comp_io[bj, 1, 1] * sw1
           + comp_io[bj, 1, 2] * sw2 + comp_h[bj, 2] * sl0
           - comp_h[bj, 0] * sl2)
    fn2 = (comp_io[bj, 2, 0] * sw0 + comp_io[bj, 2, 1] * sw1
           + comp_io[bj, 2, 2] * sw2 + comp_h[bj, 0] * sl1
           - comp_h[bj, 1] * sl0)
    ff0 = comp_m[bj] * sl0 - (comp_h[bj, 1] * sw2 - comp_h[bj, 2] * sw1)
    ff1 = comp_m[bj] * sl1 - (comp_h[bj, 2] * sw0 - comp_h[bj, 0] * sw2)
    ff2 = comp_m[bj] * sl2 - (comp_h[bj, 0] * sw1 - comp_h[bj, 1] * sw0)
    qmass[j, j] = (sw0 * fn0 + sw1 * fn1 + sw2 * fn2 + sl0 * ff0
                   + sl1 * ff1 + sl2 * ff2)
    i = fm.dof_parent[j]
    while i >= 0:
      v = (dof_s[i, 0] * fn0 + dof_s[i, 1] * fn1 + dof_s[i, 2] * fn2
           + dof_s[i, 3] * ff0 + dof_s[i, 4] * ff1 + dof_s[i, 5] * ff2)
      qmass[i, j] = v
      qmass[j, i] = v
      i = fm.dof_parent[i]

  # Cholesky solve of M qacc = tau - bias.
  for i in range(nv):
    for j in range(nv):
      chol[i, j] = qmass[i, j]
  for i in range(nv):
    for j in range(i):
      s = chol[i, j]
      for k in range(j):
        s -= chol[i, k] * chol[j, k]
      chol[i, j] = s / chol[j, j]
    s = chol[i, i]
    for k in range(i):
      s -= chol[i, k] * chol[i, k]
    if s <= 0.0:
      return 1
    chol[i, i] = s ** 0.5
  for i in range(nv):
    s = tau[i] - bias[i]
    for k in range(i):
      s -= chol[i, k] * qacc[k]
    qacc[i] = s / chol[i, i]
  for i in range(nv - 1, -1, -1):
    s = qacc[i]
    for k in range(i + 1, nv):
      s -= chol[k, i] * qacc[k]
    qacc[i] = s / chol[i, i]
  return 0


@njit(cache=True)
def _substeps(fm, qpos, qvel, ctrl, applied, n_sub,
              xpos, xquat, xmat, body_com_w, geom_xpos, geom_xmat,
              site_xpos, site_xmat, dof_s, comp_m, comp_h, comp_io,
              body_vel, body_acc, body_frc, qmass, chol, tau, bias,
              actuator_force, qacc, k, qtmp, vtmp,
              qacc_transition, act_force_transition):
  """Advances (qpos, qvel) in place by n_sub steps. Returns a status:
  0 ok, 1 singular mass matrix, 2 non-finite state.

  qacc_transition / act_force_transition record the first force evaluation
  of each substep (the forces that produced the transition)."""
  nv = fm.nv
  h = fm.timestep
  for _ in range(n_sub):
    if fm.use_rk4:
      for i in range(nv):
        qtmp[i] = qpos[i]
        vtmp[i] = qvel[i]
      status = _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat,
                     body_com_w, geom_xpos, geom_xmat, site_xpos, site_xmat,
                     dof_s, comp_m, comp_h, comp_io, body_vel, body_acc,
                     body_frc, qmass, chol, tau, bias, actuator_force, qacc)
      if status != 0:
        return 1
      for i in range(nv):   # k1
        k[0, i] = vtmp[i]
        k[1, i] = qacc[i]
        qacc_transition[i] = qacc[i]
      for i in range(fm.nu):
        act_force_transition[i] = actuator_force[i]
      for i in range(nv):
        qpos[i] = qtmp[i] + 0.5 * h * k[0, i]
        qvel[i] = vtmp[i] + 0.5 * h * k[1, i]
      status = _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat,
                     body_com_w, geom_xpos, geom_xmat, site_xpos, site_xmat,
                     dof_s, comp_m, comp_h, comp_io, body_vel, body_acc,
                     body_frc, qmass, chol, tau, bias, actuator_force, qacc)
      if status != 0:
        return 1
      for i in range(nv):   # k2
        k[2, i] = qvel[i]
        k[3, i] = qacc[i]
      for i in range(nv):
        qpos[i] = qtmp[i] + 0.5 * h * k[2, i]
        qvel[i] = vtmp[i] + 0.5 * h * k[3, i]
      status = _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat,
                     body_com_w, geom_xpos, geom_xmat, site_xpos, site_xmat,
                     dof_s, comp_m, comp_h, comp_io, body_vel, body_acc,
                     body_frc, qmass, chol, tau, bias, actuator_force, qacc)
      if status != 0:
        return 1
      for i in range(nv):   # k3
        k[4, i] = qvel[i]
        k[5, i] = qacc[i]
      for i in range(nv):
        qpos[i] = qtmp[i] + h * k[4, i]
        qvel[i] = vtmp[i] + h * k[5, i]
      status = _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat,
                     body_com_w, geom_xpos, geom_xmat, site_xpos, site_xmat,
                     dof_s, comp_m, comp_h, comp_io, body_vel, body_acc,
                     body_frc, qmass, chol, tau, bias, actuator_force, qacc)
      if status != 0:
        return 1
      for i in range(nv):   # k4
        k[6, i] = qvel[i]
        k[7, i] = qacc[i]
      for i in range(nv):
        qpos[i] = qtmp[i] + (h / 6.0) * (k[0, i] + 2.0 * k[2, i]
                                         + 2.0 * k[4, i] + k[6, i])
        qvel[i] = vtmp[i] + (h / 6.0) * (k[1, i] + 2.0 * k[3, i]
                                         + 2.0 * k[5, i] + k[7, i])
    else:
      status = _qacc(fm, qpos, qvel, ctrl, applied, xpos, xquat, xmat,
                     body_com_w, geom_xpos, geom_xmat, site_xpos, site_xmat,
                     dof_s, comp_m, comp_h, comp_io, body_vel, body_acc,
                     body_frc, qmass, chol, tau, bias, actuator_force, qacc)
      if status != 0:
        return 1
      for i in range(nv):
        qacc_transition[i] = qacc[i]
      for i in range(fm.nu):
        act_force_transition[i] = actuator_force[i]
      for i in range(nv):
        qvel[i] += h * qacc[i]
        qpos[i] += h * qvel[i]
    for i in range(nv):
      if not (np.isfinite(qpos[i]) and np.isfinite(qvel[i])):
        return 2
  # Position stage for the new state, so callers can read kinematics
  # without a second pass.
  _fk(fm, qpos, xpos, xquat, xmat, body_com_w, geom_xpos, geom_xmat,
      site_xpos, site_xmat, dof_s)
  return 0


def run_substeps(model, state, n_sub, workspace, applied=None):
  """Advances state by n_sub physics steps using the JIT kernels.

  The workspace's qacc_transition/act_force_transition afterwards hold the
  force-stage values that produced the final transition, and its kinematic
  arrays hold current forward kinematics for the new state. Returns a
  status code (0 ok, 1 singular mass matrix, 2 divergence).
  """
  fm = fast_model(model)
  w = workspace
  if applied is None:
    applied = np.zeros(model.nv)
  return _substeps(
      fm, state.qpos, state.qvel, state.ctrl, applied, n_sub,
      w.xpos, w.xquat, w.xmat, w.body_com_w, w.geom_xpos, w.geom_xmat,
      w.site_xpos, w.site_xmat, w.dof_s, w.comp_m, w.comp_h, w.comp_io,
      w.body_vel, w.body_acc, w.body_frc, w.qmass, w.chol, w.tau, w.bias,
      w.actuator_force, w.qacc, w.k, w.qtmp, w.vtmp,
      w.qacc_transition, w.act_force_transition)
