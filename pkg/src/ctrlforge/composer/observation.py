"""Configurable observation channels and their buffering pipeline.

Each observable samples a raw quantity from the physics on a configurable
substep schedule, optionally corrupts it at insertion time, delays its
availability, and keeps a FIFO of the most recent samples. At every
control step the environment returns either the whole buffer (stacked) or
an aggregate of it.

Evaluation economy: a sample whose eviction from the FIFO before its first
possible read is already certain is never evaluated. In particular, with
update_interval=1 and buffer_size=1 the source runs exactly once per
control step.
"""

import collections

import numpy as np

from ctrlforge import errors

_AGGREGATORS = {
    'mean': lambda stack: np.mean(stack, axis=0),
    'min': lambda stack: np.min(stack, axis=0),
    'max': lambda stack: np.max(stack, axis=0),
    'median': lambda stack: np.median(stack, axis=0),
}


class Observable:
  """A raw-value source plus its sampling/buffering configuration.

  Attributes (all settable):
    enabled: whether the observable is computed and returned. Off by
      default.
    update_interval: substeps between samples (int, or callable returning
      one for stochastic sensor rates).
    buffer_size: FIFO capacity; the whole buffer is the observation unless
      an aggregator is set.
    corruptor: point-wise transform applied before insertion, called as
      corruptor(value, random_state=...). Typically a noise Variation.
    aggregator: 'mean'|'min'|'max'|'median', a callable reducing the
      stacked buffer, or None to return the stacked buffer itself.
    delay: substeps between sampling and availability (int or callable).
  """

  def __init__(self, raw_callable=None, update_interval=1, buffer_size=None,
               delay=None, aggregator=None, corruptor=None, enabled=False):
    self._raw_callable = raw_callable
    self.update_interval = update_interval
    self.buffer_size = buffer_size
    self.delay = delay
    self.aggregator = aggregator
    self.corruptor = corruptor
    self.enabled = enabled

  def observation_callable(self, physics):
    return lambda: self._raw_callable(physics)

  def __call__(self, physics):
    return self.observation_callable(physics)()


class Generic(Observable):
  """Observable computed by an arbitrary callable over the physics."""

  def __init__(self, raw_callable, **kwargs):
    super().__init__(raw_callable, **kwargs)


class MJCFFeature(Observable):
  """Observable reading a bound attribute of model elements."""

  def __init__(self, kind, elements, **kwargs):
    super().__init__(None, **kwargs)
    self._kind = kind
    self._elements = elements

  def observation_callable(self, physics):
    binding = physics.bind(self._elements)
    kind = self._kind
    return lambda: np.copy(getattr(binding, kind))


def _resolve_aggregator(aggregator):
  if aggregator is None or callable(aggregator):
    return aggregator
  try:
    return _AGGREGATORS[aggregator]
  except KeyError:
    raise errors.Error(
        f"unknown aggregator '{aggregator}'; valid: "
        f'{sorted(_AGGREGATORS)}') from None


def _draw(value_or_callable, random_state, minimum):
  if callable(value_or_callable):
    value = value_or_callable(random_state)
  else:
    value = value_or_callable
  value = int(value)
  if value < minimum:
    raise errors.Error(
        f'interval/delay must be >= {minimum}, got {value}')
  return value


class Channel:
  """Pipeline state of one enabled observable within an episode."""

  def __init__(self, name, observable, physics, random_state,
               strip_singleton):
    self.name = name
    self.observable = observable
    self._source = observable.observation_callable(physics)
    self._random_state = random_state
    self._aggregator = _resolve_aggregator(observable.aggregator)
    self._buffer_size = int(observable.buffer_size or 1)
    if self._buffer_size < 1:
      raise errors.Error(f'{name}: buffer_size must be >= 1')
    self._strip = strip_singleton and self._buffer_size == 1
    self._fifo = collections.deque(maxlen=self._buffer_size)
    self._pending = []     # (arrival substep, sequence, value)
    self._seq = 0
    self._next_due = None  # next scheduled sampling substep
    self._plan = {}        # substep -> delay, for the current control step
    self.call_count = 0
    # Initial fill: sample once at reset (delay suppressed so the FIRST
    # observation is well-defined) and replicate to the buffer size.
    value = self._evaluate()
    for _ in range(self._buffer_size):
      self._fifo.append(value)

  def _evaluate(self):
    self.call_count += 1
    value = np.asarray(self._source())
    corruptor = self.observable.corruptor
    if corruptor is not None:
      value = np.asarray(corruptor(value, random_state=self._random_state))
    return value

  def plan_step(self, start_substep, end_substep, known_arrivals=None):
    """Schedules this control step's samples and prunes unobservable ones.

    Sampling substeps follow update_interval; the final substep of the
    step always samples. Each scheduled sample draws its delay now; a
    sample certain to be evicted before the first read after its arrival
    is dropped from the plan (never evaluated).
    """
    if self._next_due is None:
      self._next_due = start_substep - 1 + _draw(
          self.observable.update_interval, self._random_state, 1)
    scheduled = []
    while self._next_due <= end_substep:
      scheduled.append(self._next_due)
      self._next_due += _draw(self.observable.update_interval,
                              self._random_state, 1)
    if not scheduled or scheduled[-1] != end_substep:
      scheduled.append(end_substep)   # forced final sample
    plan = {}
    for substep in scheduled:
      delay = _draw(self.observable.delay or 0, self._random_state, 0)
      plan[substep] = delay
    # Eviction pruning: consider all known samples (pending + planned)
    # ordered by (arrival, insertion sequence); a planned sample readable
    # only at this step's end and followed by >= buffer_size known
    # arrivals before that read can never be observed.
    known = [(arrival, seq, None) for arrival, seq, _ in self._pending]
    planned = []
    for i, substep in enumerate(sorted(plan)):
      arrival = substep + plan[substep]
      planned.append((arrival, self._seq + 1 + i, substep))
    ordered = sorted(known + planned, key=lambda e: (e[0], e[1]))
    keep = {}
    for idx, (arrival, _, substep) in enumerate(ordered):
      if substep is None:
        continue
      if arrival > end_substep:
        keep[substep] = plan[substep]
        continue
      later = [1 for a, _, _ in ordered[idx + 1:] if a <= end_substep]
      if len(later) < self._buffer_size:
        keep[substep] = plan[substep]
    self._plan = keep

  def maybe_sample(self, substep):
    delay = self._plan.pop(substep, None)
    if delay is None:
      return
    self._seq += 1
    self._pending.append((substep + delay, self._seq, self._evaluate()))

  def read(self, now):
    """Moves arrived samples into the FIFO and returns the observation."""
    if self._pending:
      arrived = sorted((e for e in self._pending if e[0] <= now),
                       key=lambda e: (e[0], e[1]))
      if arrived:
        self._pending = [e for e in self._pending if e[0] > now]
        for _, _, value in arrived:
          self._fifo.append(value)
    stack = np.stack(list(self._fifo))
    if self._aggregator is not None:
      return np.asarray(self._aggregator(stack))
    if self._strip:
      return stack[0]
    return stack

  def spec(self):
    from ctrlforge.rl import specs
    sample = self.read(now=0)
    return specs.ArraySpec(shape=sample.shape, dtype=sample.dtype,
                           name=self.name)
