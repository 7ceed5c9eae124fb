"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to get one pass/fail line
per criterion.
"""

import math
import time

import numpy as np
import pytest

from ctrlforge import engine
from ctrlforge import mjcf
from ctrlforge import suite
from ctrlforge.engine import model as model_lib
from ctrlforge.physics import Physics
from ctrlforge.rl import rewards
from ctrlforge.suite import lqr as lqr_lib
from ctrlforge.suite import riccati

import conftest
import test_composer


def _report(name, detail=''):
  print(f'ACCEPTANCE {name}: PASS {detail}'.rstrip())


def test_fk_paper_values():
  """Swing-demo sphere at [0.273, 0.0732, 0.2]; z=-0.6 at qpos=pi."""
  start = time.perf_counter()
  physics = Physics.from_xml_string(conftest.SWING_XML)
  np.testing.assert_allclose(
      physics.named.data.geom_xpos['green_sphere'],
      [0.273, 0.0732, 0.2], atol=5e-4)
  with physics.reset_context():
    physics.named.data.qpos['swing'] = np.pi
  assert physics.named.data.geom_xpos['green_sphere', 'z'] == pytest.approx(
      -0.6, abs=5e-4)
  elapsed = time.perf_counter() - start
  assert elapsed < 1.0
  _report('fk-paper-values', f'({elapsed * 1e3:.0f} ms)')


def test_quaternion_paper_value():
  """quat (.5,.5,.5,.5) -> [[0,0,1],[1,0,0],[0,1,0]] within 1e-12."""
  mat = engine.quat_to_mat(np.array([0.5, 0.5, 0.5, 0.5]))
  np.testing.assert_allclose(mat, [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
                             atol=1e-12)
  _report('quaternion-paper-value')


def test_forward_velocity_reward_formula():
  """tolerance reproduces max(0, min(v/10, 1)) at v in {0, 5, 10, 15}."""
  expected = {0.0: 0.0, 5.0: 0.5, 10.0: 1.0, 15.0: 1.0}
  for v, target in expected.items():
    value = rewards.tolerance(v, bounds=(10, float('inf')), margin=10,
                              value_at_margin=0, sigmoid='linear')
    assert value == target, (v, value)
  _report('forward-velocity-reward-formula')


def test_lqr_optimality():
  """Scalar P=(1+sqrt 5)/2 within 1e-9; n=6,m=2 cost == x'Px within 1e-6
  relative; 100 perturbed gains never beat the optimum. Under 10 s."""
  start = time.perf_counter()
  scalar = riccati.solve_dare([[1.0]], [[1.0]], [[1.0]], [[1.0]])
  golden = (1 + math.sqrt(5)) / 2
  assert scalar.value_matrix[0, 0] == pytest.approx(golden, abs=1e-9)

  spec = lqr_lib.make_spec(6, 2)
  solution = lqr_lib.solve(spec)
  rng = np.random.RandomState(0)

  def simulated_cost(gain, x0, cap=100_000):
    x = np.array(x0, dtype=float)
    cost = 0.0
    for _ in range(cap):
      u = -gain @ x
      stage = float(x @ (spec.q @ x) + u @ (spec.r @ u))
      cost += stage
      if stage < 1e-15:
        return cost
      x = spec.a @ x + spec.b @ u
    return cost

  x0 = rng.uniform(-1, 1, 12)
  optimal_cost = simulated_cost(solution.gain, x0)
  predicted = float(x0 @ (solution.value_matrix @ x0))
  assert optimal_cost == pytest.approx(predicted, rel=1e-6)
  for _ in range(100):
    perturbed = solution.gain + 1e-2 * rng.randn(*solution.gain.shape)
    assert simulated_cost(perturbed, x0, cap=20_000) >= optimal_cost * (
        1 - 1e-9)
  # and the closed loop drives the state to the origin
  x = rng.uniform(-1, 1, 12)
  for _ in range(1000):
    x = spec.a @ x - spec.b @ (solution.gain @ x)
  assert np.linalg.norm(x) < 1e-6
  elapsed = time.perf_counter() - start
  assert elapsed < 10.0
  _report('lqr-optimality', f'({elapsed:.1f} s)')


def test_energy_conservation_and_rk4_order():
  """Undamped double pendulum, RK4, h=1e-3, 1000 steps: relative drift
  < 1e-5; endpoint error vs an h/8 reference contracts 16x (in [8, 32])
  when h halves."""
  model = conftest.build_double_pendulum(timestep=1e-3)
  cm = engine.compile_model(model)
  data = model_lib.DerivedData(cm)
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
  drift = abs(data.energy.sum() - e0) / abs(e0)
  assert drift < 1e-5

  def endpoint(h, t_final=0.5):
    m = conftest.build_double_pendulum(timestep=h)
    c = engine.compile_model(m)
    d = model_lib.DerivedData(c)
    s2 = model_lib.DerivedData(c)
    st = c.make_state()
    st.qpos[:] = [2.0, 0.5]
    engine.position_stage(c, st.qpos, d)
    for _ in range(int(round(t_final / h))):
      engine.step(c, d, st, s2)
      engine.position_stage(c, st.qpos, d)
    return st.qpos.copy()

  h = 1e-3
  reference = endpoint(h / 8)
  e_h = np.linalg.norm(endpoint(h) - reference)
  e_h2 = np.linalg.norm(endpoint(h / 2) - reference)
  factor = e_h / e_h2
  assert 8 < factor < 32
  _report('energy-conservation-rk4-order',
          f'(drift {drift:.2e}, order factor {factor:.1f})')


def test_crba_rnea_equivalence():
  """200 random models (<= 6 joints) x 10 states:
  max |M e_i - ID(e_i)| < 1e-9."""
  rng = np.random.RandomState(2024)
  worst = 0.0
  for _ in range(200):
    model = conftest.build_random_tree(rng, rng.randint(1, 7))
    cm = engine.compile_model(model)
    data = model_lib.DerivedData(cm)
    for _ in range(10):
      q = rng.uniform(-3, 3, cm.nq)
      engine.position_stage(cm, q, data)
      mass = engine.mass_matrix(cm, data)
      for i in range(cm.nv):
        unit = np.zeros(cm.nv)
        unit[i] = 1.0
        column = engine.inverse_dynamics(cm, data, np.zeros(cm.nv), unit,
                                         gravity=False)
        worst = max(worst, float(np.abs(mass[:, i] - column).max()))
  assert worst < 1e-9
  _report('crba-rnea-equivalence', f'(worst {worst:.2e})')


def test_suite_conventions():
  """Every registered task: unit-box actions and unit-interval rewards
  (except LQR), 1000-step episodes, returns in [0, 1000], discount 1
  except LQR termination, dims as annotated. Under 2 minutes total."""
  start = time.perf_counter()
  for entry in suite.entries():
    env = suite.load(entry.domain, entry.task, seed=511)
    spec = env.action_spec()
    is_lqr = entry.domain == 'lqr'
    if is_lqr:
      assert not spec.bounded
    else:
      np.testing.assert_array_equal(spec.minimum, -1.0)
      np.testing.assert_array_equal(spec.maximum, 1.0)
    model = env.physics.model
    dims = (model.nq + model.nv, spec.shape[0],
            sum(int(np.prod(s.shape))
                for s in env.observation_spec().values()))
    assert dims == entry.dims, (entry, dims)

    rng = np.random.RandomState(17)
    timestep = env.reset()
    episode_return = 0.0
    steps = 0
    while not timestep.last():
      if spec.bounded:
        action = rng.uniform(spec.minimum, spec.maximum, spec.shape)
      else:
        action = rng.standard_normal(spec.shape)
      timestep = env.step(action)
      steps += 1
      episode_return += timestep.reward
      if not is_lqr:
        assert 0.0 <= timestep.reward <= 1.0
        assert timestep.discount == 1.0
      else:
        assert timestep.discount in (0.0, 1.0)
      for name, array_spec in env.observation_spec().items():
        value = timestep.observation[name]
        assert value.shape == array_spec.shape
    if is_lqr:
      assert steps <= 1000
      if steps < 1000:
        assert timestep.discount == 0.0
    else:
      assert steps == 1000
      assert timestep.discount == 1.0
      assert 0.0 <= episode_return <= 1000.0
  elapsed = time.perf_counter() - start
  assert elapsed < 120.0
  _report('suite-conventions', f'({elapsed:.1f} s for '
          f'{len(suite.entries())} tasks)')


def test_observable_pipeline_grid():
  """12-configuration grid matches the lifecycle oracle exactly;
  evaluation counts obey the economy rule."""
  for params in test_composer.GRID:
    interval, buffer_size, delay, aggregator = params
    oracle_out, oracle_calls = test_composer.pipeline_oracle(3, 5, *params)
    assert oracle_out == test_composer.GOLDENS[params]
    env_out, env_calls, _ = test_composer.counter_outputs(
        3, update_interval=interval, buffer_size=buffer_size, delay=delay,
        aggregator=aggregator)
    assert env_out == test_composer.GOLDENS[params], params
    assert env_calls <= oracle_calls
  _, calls, calls_reset = test_composer.counter_outputs(
      5, update_interval=1, buffer_size=1)
  assert calls - calls_reset == 5    # exactly once per control step
  _report('observable-pipeline-grid')


def test_namespacing_random_compositions():
  """1000 random compose sequences: no identifier collisions and
  serialize/parse round-trip equality."""
  rng = np.random.RandomState(77)
  for _ in range(1000):
    roots = [mjcf.RootElement(model='base')]
    n_parts = rng.randint(1, 5)
    for _ in range(n_parts):
      part = mjcf.RootElement(model=str(rng.choice(['leg', 'arm', 'pod'])))
      body = part.worldbody.add('body', name='core')
      body.add('joint', name='axle', type='hinge')
      body.add('geom', name='shell', size=[0.05])
      host = roots[rng.randint(len(roots))]
      site = host.worldbody.add('site', pos=rng.uniform(-1, 1, 3))
      site.attach(part)
      roots.append(part)
    top = roots[0]
    for namespace in ('body', 'joint', 'geom', 'site'):
      names = [el.identifier_in(top) for el in top.find_all(namespace)]
      assert len(names) == len(set(names)), names
    xml = top.to_xml_string()
    assert mjcf.parse_string(xml).to_xml_string() == xml
  _report('namespacing-random-compositions')


def test_seed_determinism_bitwise():
  """Same seed, two runs: identical observation and reward streams."""
  for domain, task in suite.ALL_TASKS:
    def run():
      env = suite.load(domain, task, seed=2718)
      spec = env.action_spec()
      rng = np.random.RandomState(3)
      timestep = env.reset()
      observations = [np.concatenate([np.ravel(v) for v in
                                      timestep.observation.values()])]
      reward_stream = []
      for _ in range(5):
        if spec.bounded:
          action = rng.uniform(spec.minimum, spec.maximum, spec.shape)
        else:
          action = rng.standard_normal(spec.shape)
        timestep = env.step(action)
        observations.append(np.concatenate(
            [np.ravel(v) for v in timestep.observation.values()]))
        reward_stream.append(timestep.reward)
      return np.concatenate(observations), reward_stream
    obs_a, rewards_a = run()
    obs_b, rewards_b = run()
    assert (obs_a == obs_b).all(), (domain, task)
    assert rewards_a == rewards_b, (domain, task)
  _report('seed-determinism-bitwise')
