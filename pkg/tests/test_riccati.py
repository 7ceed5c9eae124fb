"""Riccati solver and LQR optimality."""

import math

import numpy as np
import pytest

from ctrlforge import errors
from ctrlforge import suite
from ctrlforge.suite import lqr as lqr_lib
from ctrlforge.suite import riccati

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


class TestScalarCase:

  def test_unit_scalar_closed_form(self):
    # P solves P = 1 + P - P^2/(1+P)  =>  P^2 - P - 1 = 0.
    solution = riccati.solve_dare([[1.0]], [[1.0]], [[1.0]], [[1.0]])
    assert solution.value_matrix[0, 0] == pytest.approx(GOLDEN_RATIO,
                                                        abs=1e-12)
    expected_gain = GOLDEN_RATIO / (1 + GOLDEN_RATIO)
    assert solution.gain[0, 0] == pytest.approx(expected_gain, abs=1e-12)

  def test_residual_below_tolerance(self):
    solution = riccati.solve_dare([[1.0]], [[1.0]], [[1.0]], [[1.0]],
                                  tol=1e-13)
    assert solution.residual < 1e-13
    defect = riccati.dare_residual(solution, np.eye(1), np.eye(1),
                                   np.eye(1), np.eye(1))
    assert defect < 1e-11


class TestLyapunovCase:

  def test_no_control_matches_series(self, rng):
    # With B empty the DARE reduces to P = Q + A'PA, whose solution for a
    # stable A is the series sum_k (A')^k A^k.
    a = rng.uniform(-0.4, 0.4, size=(4, 4))
    assert max(abs(np.linalg.eigvals(a))) < 1
    b = np.zeros((4, 0))
    solution = riccati.solve_dare(a, b, np.eye(4), np.zeros((0, 0)))
    series = np.zeros((4, 4))
    power = np.eye(4)
    for _ in range(2000):
      series += power.T @ power
      power = a @ power
    np.testing.assert_allclose(solution.value_matrix, series, atol=1e-10)
    assert solution.gain.shape == (0, 4)


class TestValidation:

  def test_dimension_mismatch(self):
    with pytest.raises(errors.Error, match='shapes'):
      riccati.solve_dare(np.eye(2), np.eye(3), np.eye(2), np.eye(3))

  def test_r_must_be_positive_definite(self):
    with pytest.raises(errors.Error, match='positive definite'):
      riccati.solve_dare(np.eye(2), np.eye(2), np.eye(2),
                         np.diag([1.0, 0.0]))

  def test_nonconvergence_reports_residual(self):
    # Marginally stable and uncontrollable: no stabilizing solution.
    a = np.eye(2)
    b = np.zeros((2, 1))
    with pytest.raises(errors.Error, match='residual'):
      riccati.solve_dare(a, b, np.eye(2), np.eye(1), max_iter=500)

  def test_converged_solution_satisfies_dare(self):
    spec = lqr_lib.make_spec(4, 2)
    solution = lqr_lib.solve(spec, tol=1e-12)
    defect = riccati.dare_residual(solution, spec.a, spec.b, spec.q,
                                   spec.r)
    assert defect < 10 * 1e-12 * max(1.0, np.abs(
        solution.value_matrix).max())


class TestLqrOptimality:

  def simulate_cost(self, spec, gain, x0, max_steps=200_000):
    x = np.array(x0, dtype=float)
    cost = 0.0
    for _ in range(max_steps):
      u = -gain @ x
      stage = float(x @ (spec.q @ x) + u @ (spec.r @ u))
      cost += stage
      if stage < 1e-15:
        break
      x = spec.a @ x + spec.b @ u
    return cost, x

  def test_value_matches_simulated_cost(self, rng):
    spec = lqr_lib.make_spec(6, 2)
    solution = lqr_lib.solve(spec)
    for _ in range(5):
      x0 = rng.uniform(-1, 1, 12)
      cost, _ = self.simulate_cost(spec, solution.gain, x0)
      predicted = float(x0 @ (solution.value_matrix @ x0))
      assert cost == pytest.approx(predicted, rel=1e-6)

  def test_perturbed_gains_never_beat_optimal(self, rng):
    spec = lqr_lib.make_spec(3, 2)
    solution = lqr_lib.solve(spec)
    x0 = rng.uniform(-1, 1, 6)
    optimal_cost, _ = self.simulate_cost(spec, solution.gain, x0)
    for _ in range(100):
      delta = rng.randn(*solution.gain.shape) * 1e-2
      cost, _ = self.simulate_cost(spec, solution.gain + delta, x0,
                                   max_steps=50_000)
      assert cost >= optimal_cost - 1e-9 * abs(optimal_cost)

  def test_state_converges_under_optimal_policy(self, rng):
    spec = lqr_lib.make_spec(6, 2)
    solution = lqr_lib.solve(spec)
    x = rng.uniform(-1, 1, 12)
    for _ in range(1000):
      x = spec.a @ x - spec.b @ (solution.gain @ x)
    assert np.linalg.norm(x) < 1e-6


class TestLqrEnvironment:

  def test_gamma_zero_on_convergence(self):
    env = suite.load('lqr', 'lqr_2_1', seed=0)
    gain = lqr_lib.solve(env.task.lqr_spec).gain
    timestep = env.reset()
    steps = 0
    while not timestep.last():
      x = np.concatenate([timestep.observation['position'],
                          timestep.observation['velocity']])
      timestep = env.step(-gain @ x)
      steps += 1
    assert timestep.discount == 0.0
    assert steps < 1000

  def test_reward_is_negative_quadratic(self):
    env = suite.load('lqr', 'lqr_2_1', seed=0)
    timestep = env.reset()
    spec = env.task.lqr_spec
    x = np.concatenate([timestep.observation['position'],
                        timestep.observation['velocity']])
    action = np.array([0.3])
    timestep = env.step(action)
    x_next = spec.a @ x + spec.b @ action
    expected = -(float(x_next @ (spec.q @ x_next))
                 + float(action @ (spec.r @ action))) * spec.timestep
    assert timestep.reward == pytest.approx(expected, rel=1e-9)

  def test_env_transition_is_exact_discretization(self):
    env = suite.load('lqr', 'lqr_6_2', seed=2)
    timestep = env.reset()
    spec = env.task.lqr_spec
    x = np.concatenate([timestep.observation['position'],
                        timestep.observation['velocity']])
    action = np.array([0.5, -0.25])
    timestep = env.step(action)
    expected = spec.a @ x + spec.b @ action
    actual = np.concatenate([timestep.observation['position'],
                             timestep.observation['velocity']])
    np.testing.assert_allclose(actual, expected, atol=1e-12)
