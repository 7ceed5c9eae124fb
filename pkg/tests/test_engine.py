"""Dynamics engine: mass properties, kinematics, CRBA/RNEA, forces,
integration."""

import math

import numpy as np
import pytest

from ctrlforge import engine
from ctrlforge import errors
from ctrlforge import mjcf
from ctrlforge.engine import fastpath
from ctrlforge.engine import inertia
from ctrlforge.engine import model as model_lib
from ctrlforge.engine import rotations

import conftest


def compiled(model):
  cm = engine.compile_model(model)
  return cm, model_lib.DerivedData(cm)


class TestGeomInertia:

  def test_sphere_closed_form(self):
    mass, com, inert = engine.geom_inertia('sphere', [0.1], 1000.0)
    assert mass == pytest.approx(4.0 / 3.0 * math.pi * 1e-3 * 1000.0,
                                 rel=1e-12)
    expected = 0.4 * mass * 0.1**2
    np.testing.assert_allclose(inert, np.eye(3) * expected, rtol=1e-12)
    np.testing.assert_array_equal(com, 0.0)

  def test_cube_symmetry(self):
    _, _, inert = engine.geom_inertia('box', [0.2, 0.2, 0.2], 500.0)
    assert inert[0, 0] == inert[1, 1] == inert[2, 2]
    assert np.allclose(inert, np.diag(np.diag(inert)))

  def test_capsule_mass_exceeds_cylinder(self):
    m_cap, _, _ = engine.geom_inertia('capsule', [0.05, 0.2], 1000.0)
    m_cyl, _, _ = engine.geom_inertia('cylinder', [0.05, 0.2], 1000.0)
    assert m_cap > m_cyl

  def test_capsule_matches_hand_formula(self):
    r, h, rho = 0.04, 0.25, 1000.0
    mass, _, inert = engine.geom_inertia('capsule', [r, h], rho)
    m_cyl = math.pi * r * r * 2 * h * rho
    m_sph = 4.0 / 3.0 * math.pi * r**3 * rho
    assert mass == pytest.approx(m_cyl + m_sph, rel=1e-12)
    i_axial = 0.5 * m_cyl * r * r + 0.4 * m_sph * r * r
    assert inert[2, 2] == pytest.approx(i_axial, rel=1e-12)

  def test_nonpositive_size_rejected(self):
    with pytest.raises(errors.CompileError):
      engine.geom_inertia('sphere', [-0.1], 1000.0)
    with pytest.raises(errors.CompileError):
      engine.geom_inertia('box', [0.1, 0.0, 0.1], 1000.0)


class TestRotations:

  def test_quat_half_half(self):
    mat = engine.quat_to_mat([0.5, 0.5, 0.5, 0.5])
    np.testing.assert_allclose(
        mat, [[0, 0, 1], [1, 0, 0], [0, 1, 0]], atol=1e-12)

  def test_identity_quat(self):
    np.testing.assert_allclose(engine.quat_to_mat([1, 0, 0, 0]), np.eye(3),
                               atol=1e-15)

  def test_half_turn_about_x(self):
    np.testing.assert_allclose(engine.quat_to_mat([0, 1, 0, 0]),
                               np.diag([1.0, -1.0, -1.0]), atol=1e-15)

  def test_zero_quat_rejected(self):
    with pytest.raises(errors.Error):
      engine.quat_to_mat([0, 0, 0, 0])

  def test_random_quats_give_proper_rotations(self, rng):
    q = rng.randn(10_000, 4)
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    eye = np.eye(3)
    for quat in q:
      mat = engine.quat_to_mat(quat)
      assert np.abs(mat @ mat.T - eye).max() < 1e-12
      assert abs(np.linalg.det(mat) - 1.0) < 1e-12
    for quat in q[::50]:   # round trip on a sample
      mat = engine.quat_to_mat(quat)
      back = rotations.mat_to_quat(mat)
      sign = np.sign(quat[0]) or 1.0
      np.testing.assert_allclose(back, sign * quat, atol=1e-9)

  def test_euler_cases(self):
    np.testing.assert_allclose(engine.euler_to_quat([0, 0, 0]),
                               [1, 0, 0, 0], atol=1e-15)
    q = engine.euler_to_quat([math.pi, 0, 0])
    np.testing.assert_allclose(np.abs(q), [0, 1, 0, 0], atol=1e-12)
    q_deg = engine.euler_to_quat([0, 0, -30], degrees=True)
    q_rad = engine.euler_to_quat([0, 0, -math.pi / 6])
    np.testing.assert_allclose(q_deg, q_rad, atol=1e-15)


class TestCompile:

  def test_swing_model(self):
    cm = engine.compile_model(mjcf.parse_string(conftest.SWING_XML))
    assert cm.nbody == 2 and cm.nq == 1 and cm.nv == 1 and cm.ngeom == 2

  def test_creature_counts(self):
    from test_mjcf import make_creature
    cm = engine.compile_model(make_creature(4))
    assert cm.njnt == 8 and cm.nu == 8

  def test_freejoint_rejected(self):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b')
    body.add('freejoint')
    body.add('geom', name='g', size=[0.1])
    with pytest.raises(errors.CompileError, match='free joint'):
      engine.compile_model(model)

  def test_zero_mass_movable_body_rejected(self):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='j')
    with pytest.raises(errors.CompileError, match='zero-mass'):
      engine.compile_model(model)

  def test_plane_off_world_rejected(self):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='j')
    body.add('geom', name='g', type='plane', size=[1, 1, 0.1])
    with pytest.raises(errors.CompileError, match='plane'):
      engine.compile_model(model)

  def test_name_tables_bijective(self, rng):
    cm = engine.compile_model(conftest.build_random_tree(rng, 5))
    for namespace in ('body', 'joint', 'geom'):
      names = cm.names(namespace)
      for i, name in enumerate(names):
        assert cm.name2id(name, namespace) == i
        assert cm.id2name(i, namespace) == name


class TestKinematics:

  def test_paper_fk_values(self):
    cm, data = compiled(mjcf.parse_string(conftest.SWING_XML))
    state = cm.make_state()
    engine.position_stage(cm, state.qpos, data)
    np.testing.assert_allclose(data.geom_xpos[1], [0.273, 0.0732, 0.2],
                               atol=5e-4)
    state.qpos[0] = math.pi
    engine.position_stage(cm, state.qpos, data)
    assert data.geom_xpos[1][2] == pytest.approx(-0.6, abs=5e-4)

  def test_geom_at_body_origin(self):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b', pos=[0.3, -0.2, 0.5])
    body.add('joint', name='j', type='hinge')
    body.add('geom', name='g', size=[0.1])
    cm, data = compiled(model)
    engine.position_stage(cm, np.array([0.7]), data)
    np.testing.assert_allclose(data.geom_xpos[0], data.xpos[1], atol=1e-15)


def single_pendulum(radius=0.01, length=1.0, mass=1.0):
  model = mjcf.RootElement(model='pendulum')
  model.compiler.angle = 'radian'
  body = model.worldbody.add('body', name='pole')
  body.add('joint', name='pin', type='hinge', axis=[0, 1, 0])
  body.add('geom', name='bob', type='sphere', size=[radius],
           pos=[0, 0, -length], mass=mass)
  return model


class TestMassMatrix:

  def test_point_pendulum_analytic(self):
    # Lagrangian oracle: M = m l^2 + (2/5) m r^2 for a sphere bob.
    cm, data = compiled(single_pendulum(radius=0.01, length=1.0, mass=1.0))
    engine.position_stage(cm, np.zeros(1), data)
    mass = engine.mass_matrix(cm, data)
    expected = 1.0 * 1.0**2 + 0.4 * 1.0 * 0.01**2
    assert mass[0, 0] == pytest.approx(expected, rel=1e-12)

  def test_symmetry_and_spd(self, rng):
    for _ in range(20):
      cm, data = compiled(conftest.build_random_tree(rng,
                                                     rng.randint(1, 7)))
      q = rng.uniform(-3, 3, cm.nq)
      engine.position_stage(cm, q, data)
      mass = engine.mass_matrix(cm, data)
      assert np.abs(mass - mass.T).max() < 1e-12
      np.linalg.cholesky(mass)    # SPD or raises

  def test_crba_matches_rnea_columns(self, rng):
    worst = 0.0
    for _ in range(30):
      cm, data = compiled(conftest.build_random_tree(rng,
                                                     rng.randint(1, 7)))
      q = rng.uniform(-3, 3, cm.nq)
      engine.position_stage(cm, q, data)
      mass = engine.mass_matrix(cm, data)
      for i in range(cm.nv):
        unit = np.zeros(cm.nv)
        unit[i] = 1.0
        column = engine.inverse_dynamics(cm, data, np.zeros(cm.nv), unit,
                                         gravity=False)
        worst = max(worst, np.abs(mass[:, i] - column).max())
    assert worst < 1e-9

  def test_planar_two_link_lagrangian(self):
    # Closed-form planar double-pendulum mass matrix as an independent
    # oracle, with point masses so link inertia terms vanish.
    model = mjcf.RootElement()
    model.compiler.angle = 'radian'
    l1, l2, m1, m2 = 0.6, 0.4, 1.2, 0.7
    upper = model.worldbody.add('body', name='u')
    upper.add('joint', name='q1', type='hinge', axis=[0, 1, 0])
    upper.add('geom', name='m1', type='sphere', size=[1e-4],
              pos=[0, 0, -l1], mass=m1)
    lower = upper.add('body', name='l', pos=[0, 0, -l1])
    lower.add('joint', name='q2', type='hinge', axis=[0, 1, 0])
    lower.add('geom', name='m2', type='sphere', size=[1e-4],
              pos=[0, 0, -l2], mass=m2)
    cm, data = compiled(model)
    ball1 = 0.4 * m1 * 1e-4**2    # rotational inertia of the tiny bobs
    ball2 = 0.4 * m2 * 1e-4**2
    for theta2 in (0.0, 0.4, -1.3, 2.2):
      engine.position_stage(cm, np.array([0.3, theta2]), data)
      mass = engine.mass_matrix(cm, data)
      m11 = (m1 * l1**2 + m2 * (l1**2 + l2**2 + 2 * l1 * l2
                                * math.cos(theta2)) + ball1 + ball2)
      m12 = m2 * (l2**2 + l1 * l2 * math.cos(theta2)) + ball2
      m22 = m2 * l2**2 + ball2
      np.testing.assert_allclose(
          mass, [[m11, m12], [m12, m22]], rtol=1e-9, atol=1e-12)


class TestBiasForces:

  def test_hanging_equilibrium(self):
    cm, data = compiled(single_pendulum())
    engine.position_stage(cm, np.zeros(1), data)
    bias = engine.bias_forces(cm, data, np.zeros(1))
    np.testing.assert_allclose(bias, 0.0, atol=1e-12)

  def test_horizontal_gravity_torque(self):
    cm, data = compiled(single_pendulum(length=1.0, mass=1.0))
    engine.position_stage(cm, np.array([math.pi / 2]), data)
    bias = engine.bias_forces(cm, data, np.zeros(1))
    assert bias[0] == pytest.approx(1.0 * 9.81 * 1.0, rel=1e-9)

  def test_bias_matches_lagrangian_derivatives(self, rng):
    # c_k = sum_ij (dM_kj/dq_i - 0.5 dM_ij/dq_k) qd_i qd_j + dV/dq_k,
    # with M and V differentiated numerically: an independent route to
    # the velocity and gravity terms produced by the Newton-Euler pass.
    cm, data = compiled(conftest.build_double_pendulum())
    eps = 1e-6
    for _ in range(5):
      q = rng.uniform(-2, 2, cm.nq)
      qd = rng.uniform(-2, 2, cm.nv)

      def mass_at(qq):
        engine.position_stage(cm, qq, data)
        return engine.mass_matrix(cm, data).copy()

      def potential_at(qq):
        engine.position_stage(cm, qq, data)
        engine.mass_matrix(cm, data, out=data.qmass)
        return engine.energy(cm, data, qq, np.zeros(cm.nv))[0]

      dm = np.zeros((cm.nv, cm.nv, cm.nv))
      dv = np.zeros(cm.nv)
      for k in range(cm.nv):
        dq = np.zeros(cm.nq)
        dq[k] = eps
        dm[k] = (mass_at(q + dq) - mass_at(q - dq)) / (2 * eps)
        dv[k] = (potential_at(q + dq) - potential_at(q - dq)) / (2 * eps)
      expected = np.zeros(cm.nv)
      for k in range(cm.nv):
        acc = dv[k]
        for i in range(cm.nv):
          for j in range(cm.nv):
            acc += (dm[i][k, j] - 0.5 * dm[k][i, j]) * qd[i] * qd[j]
        expected[k] = acc
      engine.position_stage(cm, q, data)
      bias = engine.bias_forces(cm, data, qd)
      np.testing.assert_allclose(bias, expected, rtol=1e-4, atol=1e-4)


class TestAppliedForces:

  def _actuated_model(self, kind, **attrs):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='j', type='hinge', axis=[0, 1, 0])
    body.add('geom', name='g', size=[0.05], mass=1.0)
    model.actuator.add(kind, name='a', joint='j', **attrs)
    return engine.compile_model(model)

  def test_motor_force(self):
    cm = self._actuated_model('motor', gear=1.0)
    tau = engine.actuation_forces(cm, np.zeros(1), np.zeros(1),
                                  np.array([0.5]))
    np.testing.assert_allclose(tau, [0.5])

  def test_position_at_setpoint(self):
    cm = self._actuated_model('position', kp=10.0)
    tau = engine.actuation_forces(cm, np.array([0.7]), np.zeros(1),
                                  np.array([0.7]))
    np.testing.assert_allclose(tau, [0.0], atol=1e-15)

  def test_position_error_response(self):
    cm = self._actuated_model('position', kp=10.0)
    tau = engine.actuation_forces(cm, np.array([0.4]), np.zeros(1),
                                  np.array([0.5]))
    np.testing.assert_allclose(tau, [1.0], rtol=1e-12)

  def test_position_velocity_damping(self):
    cm = self._actuated_model('position', kp=10.0, kv=2.0)
    tau = engine.actuation_forces(cm, np.array([0.5]), np.array([1.0]),
                                  np.array([0.5]))
    np.testing.assert_allclose(tau, [-2.0], rtol=1e-12)

  def test_ctrl_clamped_to_range(self):
    cm = self._actuated_model('motor', gear=1.0, ctrlrange=[-1, 1])
    tau = engine.actuation_forces(cm, np.zeros(1), np.zeros(1),
                                  np.array([5.0]))
    np.testing.assert_allclose(tau, [1.0])

  def test_passive_damping(self):
    model = mjcf.RootElement()
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='j', damping=2.0)
    body.add('geom', name='g', size=[0.05], mass=1.0)
    cm = engine.compile_model(model)
    np.testing.assert_allclose(
        engine.passive_forces(cm, np.zeros(1), np.array([1.0])), [-2.0])
    np.testing.assert_allclose(
        engine.passive_forces(cm, np.array([3.0]), np.zeros(1)), [0.0])

  def test_damped_pendulum_energy_decreases(self):
    model = conftest.build_double_pendulum(damping=0.5)
    cm = engine.compile_model(model)
    data = model_lib.DerivedData(cm)
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qpos[:] = [1.5, 0.3]
    energies = []
    for _ in range(200):
      engine.position_stage(cm, state.qpos, data)
      engine.dynamics_stage(cm, data, state.qpos, state.qvel, state.ctrl)
      energies.append(data.energy.sum())
      engine.step(cm, data, state, scratch)
    diffs = np.diff(energies)
    assert (diffs <= 1e-10).all()


class TestFluidDrag:

  def _capsule_model(self, density):
    model = mjcf.RootElement()
    model.compiler.angle = 'radian'
    model.option.density = density
    model.option.gravity = [0, 0, 0]
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='x', type='slide', axis=[1, 0, 0])
    body.add('joint', name='z', type='slide', axis=[0, 0, 1])
    # capsule axis along x (via fromto)
    body.add('geom', name='g', type='capsule',
             fromto=[-0.2, 0, 0, 0.2, 0, 0], size=[0.02])
    return compiled(model)

  def test_zero_density_no_drag(self):
    cm, data = self._capsule_model(0.0)
    engine.position_stage(cm, np.zeros(2), data)
    tau = engine.fluid_drag(cm, data, np.array([1.0, 1.0]))
    np.testing.assert_array_equal(tau, 0.0)

  def test_perpendicular_drag_exceeds_axial(self):
    cm, data = self._capsule_model(1000.0)
    engine.position_stage(cm, np.zeros(2), data)
    axial = engine.fluid_drag(cm, data, np.array([1.0, 0.0]))
    perp = engine.fluid_drag(cm, data, np.array([0.0, 1.0]))
    assert abs(perp[1]) > abs(axial[0]) > 0


class TestIntegration:

  def test_free_particle_exact(self):
    model = mjcf.RootElement()
    model.option.gravity = [0, 0, 0]
    model.option.timestep = 0.01
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='x', type='slide', axis=[1, 0, 0])
    body.add('geom', name='g', size=[0.05], mass=1.0)
    cm, data = compiled(model)
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qvel[0] = 1.0
    engine.position_stage(cm, state.qpos, data)
    engine.step(cm, data, state, scratch)
    assert state.qpos[0] == 0.01
    assert state.time == 0.01

  def test_small_angle_matches_harmonic_solution(self):
    # At small amplitude the pendulum is a harmonic oscillator; RK4 at a
    # coarse step already tracks it to a tiny absolute error.
    amplitude = 1e-3
    model = single_pendulum(length=1.0, mass=1.0, radius=1e-5)
    model.option.timestep = 0.02
    model.option.integrator = 'rk4'
    cm, data = compiled(model)
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qpos[0] = amplitude
    engine.position_stage(cm, state.qpos, data)
    for _ in range(25):
      engine.step(cm, data, state, scratch)
      engine.position_stage(cm, state.qpos, data)
    exact = amplitude * math.cos(math.sqrt(9.81) * state.time)
    assert state.qpos[0] == pytest.approx(exact, abs=1e-8)

  def test_rk4_fourth_order_convergence(self):
    # Endpoint error vs an h/8 reference trajectory shrinks ~16x when h
    # halves.
    def endpoint(h, t_final=0.5):
      model = conftest.build_double_pendulum(timestep=h)
      cm, data = compiled(model)
      scratch = model_lib.DerivedData(cm)
      state = cm.make_state()
      state.qpos[:] = [2.0, 0.5]
      engine.position_stage(cm, state.qpos, data)
      for _ in range(int(round(t_final / h))):
        engine.step(cm, data, state, scratch)
        engine.position_stage(cm, state.qpos, data)
      return state.qpos.copy()

    h = 2e-3
    reference = endpoint(h / 8)
    e1 = np.linalg.norm(endpoint(h) - reference)
    e2 = np.linalg.norm(endpoint(h / 2) - reference)
    assert 8 < e1 / e2 < 32

  def test_rk4_energy_drift(self):
    cm, data = compiled(conftest.build_double_pendulum())
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qpos[:] = [2.0, 0.5]
    engine.position_stage(cm, state.qpos, data)
    engine.dynamics_stage(cm, data, state.qpos, state.qvel, state.ctrl)
    e0 = data.energy.sum()
    for _ in range(1000):
      engine.step(cm, data, state, scratch)
      engine.position_stage(cm, state.qpos, data)
    engine.dynamics_stage(cm, data, state.qpos, state.qvel, state.ctrl)
    e1 = data.energy.sum()
    assert abs(e1 - e0) / abs(e0) < 1e-5

  def test_semi_implicit_no_secular_drift(self):
    model = single_pendulum()
    model.option.timestep = 1e-3
    cm, data = compiled(model)
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qpos[0] = 1.0
    engine.position_stage(cm, state.qpos, data)
    engine.dynamics_stage(cm, data, state.qpos, state.qvel, state.ctrl)
    e0 = data.energy.sum()
    worst = 0.0
    for _ in range(10_000):
      engine.step(cm, data, state, scratch, method='euler')
      engine.position_stage(cm, state.qpos, data)
      engine.mass_matrix(cm, data, out=data.qmass)
      e = sum(engine.energy(cm, data, state.qpos, state.qvel))
      worst = max(worst, abs(e - e0))
    # Symplectic behaviour: bounded oscillation, no blow-up.
    assert worst < 0.05 * abs(e0) + 0.05

  def test_divergence_detected(self):
    # A stiff spring with a huge explicit step amplifies until overflow.
    model = mjcf.RootElement()
    model.option.timestep = 10.0
    model.option.integrator = 'euler'
    body = model.worldbody.add('body', name='b')
    body.add('joint', name='j', type='slide', axis=[1, 0, 0],
             stiffness=1e8)
    body.add('geom', name='g', size=[0.05], mass=1.0)
    cm, data = compiled(model)
    scratch = model_lib.DerivedData(cm)
    state = cm.make_state()
    state.qpos[0] = 1.0
    engine.position_stage(cm, state.qpos, data)
    with pytest.raises(errors.DivergenceError, match='diverged'):
      with np.errstate(over='ignore', invalid='ignore'):
        for _ in range(1000):
          engine.step(cm, data, state, scratch)

  def test_determinism_bitwise(self):
    cm, data = compiled(conftest.build_double_pendulum())
    scratch = model_lib.DerivedData(cm)
    results = []
    for _ in range(2):
      state = cm.make_state()
      state.qpos[:] = [1.1, -0.4]
      state.qvel[:] = [0.2, 0.1]
      engine.position_stage(cm, state.qpos, data)
      engine.step(cm, data, state, scratch)
      results.append((state.qpos.copy(), state.qvel.copy()))
    assert (results[0][0] == results[1][0]).all()
    assert (results[0][1] == results[1][1]).all()


@pytest.mark.skipif(not fastpath.AVAILABLE, reason='numba unavailable')
class TestFastPath:

  def test_matches_reference_trajectories(self, rng):
    for integrator in ('euler', 'rk4'):
      for trial in range(5):
        model = conftest.build_random_tree(rng, rng.randint(1, 6))
        model.option.timestep = 1e-3
        model.option.integrator = integrator
        cm = engine.compile_model(model)
        data = model_lib.DerivedData(cm)
        scratch = model_lib.DerivedData(cm)
        state_ref = cm.make_state()
        state_ref.qpos[:] = rng.uniform(-1, 1, cm.nq)
        state_fast = state_ref.copy()
        engine.position_stage(cm, state_ref.qpos, data)
        for _ in range(50):
          engine.step(cm, data, state_ref, scratch)
          engine.position_stage(cm, state_ref.qpos, data)
        ws = fastpath.Workspace(cm)
        status = fastpath.run_substeps(cm, state_fast, 50, ws)
        assert status == 0
        np.testing.assert_allclose(state_fast.qpos, state_ref.qpos,
                                   rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(state_fast.qvel, state_ref.qvel,
                                   rtol=1e-9, atol=1e-12)
