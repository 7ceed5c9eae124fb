"""Composer: callback lifecycle, observation pipeline, variations."""

import collections

import numpy as np
import pytest

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.composer import distributions
from ctrlforge.composer import noises
from ctrlforge.composer import variation


# ---------------------------------------------------------------------------
# A no-economy reference simulation of the buffering pipeline, following the
# documented lifecycle: samples on the update_interval schedule plus a forced
# final sample per control step, arrival-ordered insertion after `delay`
# substeps, FIFO of `buffer_size`, read at every control-step end.
# ---------------------------------------------------------------------------


def aggregate(stack, aggregator, strip):
  arr = np.asarray(stack, dtype=float)
  if aggregator == 'mean':
    return float(arr.mean())
  if aggregator == 'max':
    return float(arr.max())
  if aggregator == 'min':
    return float(arr.min())
  if aggregator == 'median':
    return float(np.median(arr))
  if strip and len(stack) == 1:
    return float(arr[0])
  return [float(v) for v in arr]


def pipeline_oracle(n_steps, n_sub, interval, buffer_size, delay,
                    aggregator):
  fifo = collections.deque(maxlen=buffer_size)
  fifo.extend([0.0] * buffer_size)      # reset fill, value at substep 0
  pending = []
  seq = 0
  next_due = interval
  outputs = []
  calls = 1                             # the reset evaluation
  for step in range(1, n_steps + 1):
    end = step * n_sub
    dues = []
    while next_due <= end:
      dues.append(next_due)
      next_due += interval
    if not dues or dues[-1] != end:
      dues.append(end)
    for s in sorted(dues):
      seq += 1
      pending.append((s + delay, seq, float(s)))
      calls += 1
    arrived = sorted(p for p in pending if p[0] <= end)
    pending = [p for p in pending if p[0] > end]
    for _, _, value in arrived:
      fifo.append(value)
    outputs.append(aggregate(list(fifo), aggregator,
                             strip=buffer_size == 1))
  return outputs, calls


# Frozen expected outputs of the 12-case grid (n_steps=3, n_sub=5),
# computed with the oracle above and checked by hand against the
# documented lifecycle.
GRID = [
    (1, 1, 0, None), (1, 1, 2, None), (2, 3, 0, None), (1, 3, 0, None),
    (3, 1, 0, None), (2, 2, 1, None), (1, 5, 0, 'mean'), (1, 4, 0, 'max'),
    (2, 3, 2, None), (1, 2, 7, None), (5, 2, 0, 'min'), (4, 3, 3, 'median'),
]
GOLDENS = {
    (1, 1, 0, None): [5.0, 10.0, 15.0],
    (1, 1, 2, None): [3.0, 8.0, 13.0],
    (2, 3, 0, None): [[2.0, 4.0, 5.0], [6.0, 8.0, 10.0],
                      [12.0, 14.0, 15.0]],
    (1, 3, 0, None): [[3.0, 4.0, 5.0], [8.0, 9.0, 10.0],
                      [13.0, 14.0, 15.0]],
    (3, 1, 0, None): [5.0, 10.0, 15.0],
    (2, 2, 1, None): [[2.0, 4.0], [6.0, 8.0], [12.0, 14.0]],
    (1, 5, 0, 'mean'): [3.0, 8.0, 13.0],
    (1, 4, 0, 'max'): [5.0, 10.0, 15.0],
    (2, 3, 2, None): [[0.0, 0.0, 2.0], [5.0, 6.0, 8.0], [8.0, 10.0, 12.0]],
    (1, 2, 7, None): [[0.0, 0.0], [2.0, 3.0], [7.0, 8.0]],
    (5, 2, 0, 'min'): [0.0, 5.0, 10.0],
    (4, 3, 3, 'median'): [0.0, 4.0, 10.0],
}


class BallArena(composer.Entity):
  """Minimal arena: a single sliding ball."""

  def _build(self, name='arena'):
    self._model = mjcf.RootElement(model=name)
    body = self._model.worldbody.add('body', name='ball')
    body.add('joint', name='lift', type='slide', axis=[0, 0, 1])
    body.add('geom', name='ball', type='sphere', size=[0.1])

  @property
  def mjcf_model(self):
    return self._model


class CounterTask(composer.Task):
  """Task whose observable reports the running substep index."""

  def __init__(self, n_sub=5, **observable_kwargs):
    self._arena = BallArena()
    self.control_timestep = n_sub * self.physics_timestep
    self.substep = 0
    self._obs = {
        'counter': composer.Generic(lambda physics: float(self.substep),
                                    enabled=True, **observable_kwargs),
    }

  @property
  def root_entity(self):
    return self._arena

  @property
  def task_observables(self):
    return self._obs

  def initialize_episode(self, physics, random_state):
    self.substep = 0

  def after_substep(self, physics, random_state):
    self.substep += 1

  def get_reward(self, physics):
    return 0.0


def counter_outputs(n_steps, **observable_kwargs):
  env = composer.Environment(CounterTask(**observable_kwargs),
                             random_state=0)
  env.reset()
  calls_after_reset = env.observation_updater_call_counts()['counter']
  outputs = []
  for _ in range(n_steps):
    timestep = env.step([])
    value = timestep.observation['counter']
    outputs.append(value.tolist() if np.ndim(value) else float(value))
  calls = env.observation_updater_call_counts()['counter']
  return outputs, calls, calls_after_reset


class TestPipelineGrid:

  @pytest.mark.parametrize('params', GRID,
                           ids=[f'i{i}_b{b}_d{d}_{a}' for i, b, d, a in GRID])
  def test_matches_oracle_and_golden(self, params):
    interval, buffer_size, delay, aggregator = params
    oracle_out, oracle_calls = pipeline_oracle(3, 5, *params)
    assert oracle_out == GOLDENS[params]   # oracle is pinned
    env_out, env_calls, _ = counter_outputs(
        3, update_interval=interval, buffer_size=buffer_size, delay=delay,
        aggregator=aggregator)
    assert env_out == GOLDENS[params]
    # Evaluation economy never evaluates more than the naive schedule.
    assert env_calls <= oracle_calls

  def test_economy_single_eval_per_step(self):
    _, calls, calls_reset = counter_outputs(4, update_interval=1,
                                            buffer_size=1)
    assert calls_reset == 1          # the reset fill
    assert calls - calls_reset == 4  # exactly once per control step

  def test_delay_never_visible_early(self):
    # A sample taken at substep s must not appear before substep s+delay:
    # with delay=4 and 5 substeps, the step-1 observation can only contain
    # samples from substep 1 (arriving at 5).
    outputs, _, _ = counter_outputs(2, update_interval=1, buffer_size=1,
                                    delay=4)
    assert outputs[0] == 1.0
    assert outputs[1] == 6.0

  def test_disabled_observables_never_evaluated(self):
    calls = {'n': 0}

    class Probe(CounterTask):
      def __init__(self):
        super().__init__()
        def source(physics):
          calls['n'] += 1
          return 0.0
        self._obs['disabled'] = composer.Generic(source, enabled=False)

    env = composer.Environment(Probe(), random_state=0)
    env.reset()
    env.step([])
    assert calls['n'] == 0
    assert 'disabled' not in env.observation_spec()

  def test_random_configurations_match_oracle(self):
    rng = np.random.RandomState(4)
    for _ in range(25):
      interval = int(rng.randint(1, 7))
      buffer_size = int(rng.randint(1, 6))
      delay = int(rng.randint(0, 9))
      aggregator = [None, 'mean', 'min', 'max', 'median'][rng.randint(5)]
      n_sub = int(rng.randint(2, 8))
      oracle_out, oracle_calls = pipeline_oracle(
          4, n_sub, interval, buffer_size, delay, aggregator)
      env = composer.Environment(
          CounterTask(n_sub=n_sub, update_interval=interval,
                      buffer_size=buffer_size, delay=delay,
                      aggregator=aggregator), random_state=0)
      env.reset()
      outputs = []
      for _ in range(4):
        value = env.step([]).observation['counter']
        outputs.append(value.tolist() if np.ndim(value) else float(value))
      params = (interval, buffer_size, delay, aggregator, n_sub)
      assert outputs == oracle_out, params
      assert env.observation_updater_call_counts()['counter'] <= \
          oracle_calls, params

  def test_mjcf_feature_observable_reads_bound_fields(self):
    class FeatureTask(CounterTask):
      def __init__(self):
        super().__init__()
        joint = self._arena.mjcf_model.find('joint', 'lift')
        self._joint = joint
        self._obs['lift_pos'] = composer.MJCFFeature('qpos', [joint],
                                                     enabled=True)

      def initialize_episode(self, physics, random_state):
        super().initialize_episode(physics, random_state)
        physics.bind(self._joint).qpos = 0.37
        physics.forward()

    env = composer.Environment(FeatureTask(), random_state=0)
    timestep = env.reset()
    np.testing.assert_allclose(timestep.observation['lift_pos'], [0.37])

  def test_stochastic_update_interval_is_seed_deterministic(self):
    def build():
      interval = lambda rs: int(rs.randint(1, 4))
      return composer.Environment(
          CounterTask(update_interval=interval, buffer_size=2),
          random_state=123)
    streams = []
    for _ in range(2):
      env = build()
      env.reset()
      streams.append([env.step([]).observation['counter'].tolist()
                      for _ in range(5)])
    assert streams[0] == streams[1]


class TestLifecycleOrder:

  def test_trace_matches_documented_sequence(self):
    task = CounterTask(n_sub=2)
    env = composer.Environment(task, random_state=0)
    trace = []
    env.set_hooks_trace(trace)
    env.reset()
    n_entities = len(list(task.root_entity.iter_entities()))
    expected_reset = (
        [('initialize_episode_mjcf', None)]
        + [('initialize_episode_mjcf', i) for i in range(n_entities)]
        + [('compile', None)]
        + [('initialize_episode', None)]
        + [('initialize_episode', i) for i in range(n_entities)]
    )
    assert trace == expected_reset
    trace.clear()
    env.step([])
    entity_events = lambda name: [(name, i) for i in range(n_entities)]
    expected_step = (
        [('before_step', None)] + entity_events('before_step')
        # substep 1 of 2
        + [('before_substep', None)] + entity_events('before_substep')
        + [('physics_step', None)]
        + [('after_substep', None)] + entity_events('after_substep')
        + [('write_buffers', None)]
        # substep 2 of 2: after_step precedes the final buffer write
        + [('before_substep', None)] + entity_events('before_substep')
        + [('physics_step', None)]
        + [('after_substep', None)] + entity_events('after_substep')
        + [('after_step', None)] + entity_events('after_step')
        + [('write_buffers_final', None)]
        + [('read_buffers', None)]
    )
    assert trace == expected_step

  def test_entity_callbacks_depth_first_attachment_order(self):
    order = []

    class Probe(BallArena):
      def _build(self, tag):
        super()._build(name=tag)
        self._tag = tag

      def initialize_episode(self, physics, random_state):
        order.append(self._tag)

    class TreeTask(composer.Task):
      def __init__(self):
        self._root = Probe('root')
        first = Probe('first')
        second = Probe('second')
        nested = Probe('first_child')
        self._root.attach(first)
        first.attach(nested)
        self._root.attach(second)

      @property
      def root_entity(self):
        return self._root

      def get_reward(self, physics):
        return 0.0

    env = composer.Environment(TreeTask(), random_state=0)
    order.clear()
    env.reset()
    assert order == ['root', 'first', 'first_child', 'second']

  def test_callback_errors_are_annotated(self):
    class Exploding(BallArena):
      def initialize_episode(self, physics, random_state):
        raise RuntimeError('boom')

    class Task(composer.Task):
      def __init__(self):
        self._root = Exploding()

      @property
      def root_entity(self):
        return self._root

      def get_reward(self, physics):
        return 0.0

    from ctrlforge import errors
    with pytest.raises(errors.Error,
                       match='initialize_episode.*Exploding.*boom'):
      composer.Environment(Task(), random_state=0)


class TestVariations:

  def test_evaluate_structure(self, rng):
    out = variation.evaluate((2.0, distributions.Uniform(0, 1)),
                             random_state=rng)
    assert out[0] == 2.0 and 0 <= out[1] < 1

  def test_arithmetic_composition(self, rng):
    shifted = distributions.Uniform(0, 1) + 1
    values = [shifted(random_state=rng) for _ in range(100)]
    assert all(1 <= v < 2 for v in values)
    halved = distributions.Uniform(0, 1) / 2
    assert all(0 <= halved(random_state=rng) < 0.5 for _ in range(100))

  def test_uniform_circle_pattern(self, rng):
    class UniformCircle(variation.Variation):
      def __init__(self, distance):
        self._distance = distance
        self._heading = distributions.Uniform(0, 2 * np.pi)

      def __call__(self, initial_value=None, current_value=None,
                   random_state=None):
        distance, heading = variation.evaluate(
            (self._distance, self._heading), random_state=random_state)
        return (distance * np.cos(heading), distance * np.sin(heading), 0)

    circle = UniformCircle(distributions.Uniform(0.5, 0.75))
    for _ in range(200):
      x, y, z = circle(random_state=rng)
      assert z == 0
      assert 0.5 <= np.hypot(x, y) <= 0.75

  def test_additive_noise_statistics(self, rng):
    corruptor = noises.Additive(distributions.Normal(scale=0.01))
    samples = np.array([corruptor(0.0, random_state=rng)
                        for _ in range(100_000)])
    assert abs(samples.mean()) < 1e-3
    assert samples.std() == pytest.approx(0.01, rel=0.05)

  def test_multiplicative_lognormal_positive(self, rng):
    corruptor = noises.Multiplicative(distributions.LogNormal(sigma=0.01))
    values = np.ones(1000)
    out = corruptor(values, random_state=rng)
    assert (out > 0).all()

  def test_additive_zero_is_identity(self, rng):
    corruptor = noises.Additive(0.0)
    np.testing.assert_array_equal(corruptor(np.arange(5.0),
                                            random_state=rng),
                                  np.arange(5.0))

  def test_invalid_parameters(self):
    from ctrlforge import errors
    with pytest.raises(errors.Error):
      distributions.Uniform(1.0, 0.0)
    with pytest.raises(errors.Error):
      distributions.Normal(scale=-1.0)
    with pytest.raises(errors.Error):
      distributions.LogNormal(sigma=0.0)


class VariedTask(CounterTask):
  """Counter task with per-episode model and state randomisation."""

  def __init__(self):
    super().__init__()
    ball = self._arena.mjcf_model.find('geom', 'ball')
    self._ball = ball
    self._initial_size = float(ball.size[0])
    self._mjcf_variator = variation.MJCFVariator()
    self._mjcf_variator.bind_attributes(
        ball, size=distributions.Uniform(0.9, 1.1) * self._initial_size)
    self._physics_variator = variation.PhysicsVariator()
    self._physics_variator.bind_attributes(
        self._arena.mjcf_model.find('joint', 'lift'),
        qpos=distributions.Uniform(-0.2, 0.2))

  def initialize_episode_mjcf(self, random_state):
    self._mjcf_variator.apply_variations(random_state)

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    self._physics_variator.apply_variations(physics, random_state)


class TestVariators:

  def test_mjcf_variation_bounds_and_initial_value(self):
    task = VariedTask()
    env = composer.Environment(task, random_state=5)
    sizes = []
    for _ in range(50):
      env.reset()
      sizes.append(float(task._ball.size[0]))
    low = 0.9 * task._initial_size
    high = 1.1 * task._initial_size
    assert all(low <= s <= high for s in sizes)
    assert len(set(np.round(sizes, 12))) > 10
    # initial_value stays the pre-variation value from the first episode
    key = (id(task._ball), 'size')
    assert float(task._mjcf_variator._initial[key][0]) == pytest.approx(
        task._initial_size)

  def test_physics_variation_randomizes_state(self):
    task = VariedTask()
    env = composer.Environment(task, random_state=5)
    starts = []
    for _ in range(10):
      timestep = env.reset()
      starts.append(float(env.physics.data.qpos[0]))
      del timestep
    assert len(set(starts)) > 1
    assert all(-0.2 <= s <= 0.2 for s in starts)

  def test_empty_variator_leaves_model_unchanged(self):
    task = CounterTask()
    ball = task.root_entity.mjcf_model.find('geom', 'ball')
    before = ball.size.copy()
    empty = variation.MJCFVariator()
    empty.apply_variations(np.random.RandomState(0))
    np.testing.assert_array_equal(ball.size, before)


class TestSeedDeterminism:

  def test_full_streams_identical(self):
    def run():
      env = composer.Environment(VariedTask(), random_state=99)
      stream = []
      timestep = env.reset()
      stream.append(timestep.observation['counter'])
      for _ in range(8):
        timestep = env.step([])
        stream.append((timestep.observation['counter'], timestep.reward))
      return stream
    assert run() == run()

  def test_different_seeds_differ(self):
    def first_qpos(seed):
      env = composer.Environment(VariedTask(), random_state=seed)
      env.reset()
      return float(env.physics.data.qpos[0])
    assert first_qpos(1) != first_qpos(2)


class TestEntityPose:

  def test_set_pose_moves_attached_entity(self):
    root = BallArena('host')
    child = BallArena('payload')
    root.attach(child)

    class Task(composer.Task):
      def __init__(self):
        self._root = root

      @property
      def root_entity(self):
        return self._root

      def initialize_episode(self, physics, random_state):
        child.set_pose(physics, position=[0.5, 0.25, 0.1])

      def get_reward(self, physics):
        return 0.0

    env = composer.Environment(Task(), random_state=0)
    env.reset()
    pos, _ = child.get_pose(env.physics)
    np.testing.assert_allclose(pos, [0.5, 0.25, 0.1])

  def test_global_vector_to_local_frame(self):
    root = BallArena('host')
    child = BallArena('payload')
    frame = root.attach(child)
    frame.quat = [np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)]  # 90 deg yaw

    class Task(composer.Task):
      def __init__(self):
        self._root = root

      @property
      def root_entity(self):
        return self._root

      def get_reward(self, physics):
        return 0.0

    env = composer.Environment(Task(), random_state=0)
    env.reset()
    local = child.global_vector_to_local_frame(env.physics, [1.0, 0.0, 0.0])
    np.testing.assert_allclose(local, [0.0, -1.0, 0.0], atol=1e-12)
