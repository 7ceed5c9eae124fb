"""Benchmark task registry and loaders.

Tasks are addressed as (domain, task) pairs. `BENCHMARKING` holds the
standard benchmark set, `EXTRA` the harder or non-conforming tasks (the
procedural multi-pole cartpoles, the randomised-gain point mass, and LQR,
whose actions and rewards are unbounded); `ALL_TASKS` is their union.
"""

import collections

import numpy as np

from ctrlforge import composer
from ctrlforge import errors
from ctrlforge.suite import acrobot
from ctrlforge.suite import base
from ctrlforge.suite import cartpole
from ctrlforge.suite import lqr
from ctrlforge.suite import pendulum
from ctrlforge.suite import point_mass
from ctrlforge.suite import reacher
from ctrlforge.suite import riccati
from ctrlforge.suite import swimmer

TaskEntry = collections.namedtuple(
    'TaskEntry', ['domain', 'task', 'factory', 'tags', 'dims'])

_REGISTRY = collections.OrderedDict()


def _register(domain, task, factory, tags, dims):
  _REGISTRY[(domain, task)] = TaskEntry(domain, task, factory,
                                        frozenset(tags), dims)


_register('pendulum', 'swingup', pendulum.SwingUp,
          tags=('benchmarking',), dims=(2, 1, 3))
_register('acrobot', 'swingup', lambda **kw: acrobot.SwingUp(**kw),
          tags=('benchmarking',), dims=(4, 1, 6))
_register('acrobot', 'swingup_sparse',
          lambda **kw: acrobot.SwingUp(sparse=True, **kw),
          tags=('benchmarking',), dims=(4, 1, 6))
_register('cartpole', 'balance',
          lambda **kw: cartpole.CartPole(swing_up=False, **kw),
          tags=('benchmarking',), dims=(4, 1, 5))
_register('cartpole', 'balance_sparse',
          lambda **kw: cartpole.CartPole(swing_up=False, sparse=True, **kw),
          tags=('benchmarking',), dims=(4, 1, 5))
_register('cartpole', 'swingup',
          lambda **kw: cartpole.CartPole(swing_up=True, **kw),
          tags=('benchmarking',), dims=(4, 1, 5))
_register('cartpole', 'swingup_sparse',
          lambda **kw: cartpole.CartPole(swing_up=True, sparse=True, **kw),
          tags=('benchmarking',), dims=(4, 1, 5))
_register('cartpole', 'two_poles',
          lambda **kw: cartpole.CartPole(num_poles=2, **kw),
          tags=('extra',), dims=(6, 1, 8))
_register('cartpole', 'three_poles',
          lambda **kw: cartpole.CartPole(num_poles=3, **kw),
          tags=('extra',), dims=(8, 1, 11))
_register('point_mass', 'easy',
          lambda **kw: point_mass.PointMass(**kw),
          tags=('benchmarking',), dims=(4, 2, 4))
_register('point_mass', 'hard',
          lambda **kw: point_mass.PointMass(randomize_gains=True, **kw),
          tags=('extra',), dims=(4, 2, 4))
_register('reacher', 'easy',
          lambda **kw: reacher.Reacher(target_size=0.05, **kw),
          tags=('benchmarking',), dims=(4, 2, 6))
_register('reacher', 'hard',
          lambda **kw: reacher.Reacher(target_size=0.015, **kw),
          tags=('benchmarking',), dims=(4, 2, 6))
_register('swimmer', 'swimmer6',
          lambda **kw: swimmer.Swimmer(n_links=6, **kw),
          tags=('benchmarking',), dims=(16, 5, 25))
_register('swimmer', 'swimmer15',
          lambda **kw: swimmer.Swimmer(n_links=15, **kw),
          tags=('benchmarking',), dims=(34, 14, 61))
_register('lqr', 'lqr_2_1',
          lambda **kw: lqr.Lqr(n_masses=2, n_actuated=1, **kw),
          tags=('extra',), dims=(4, 1, 4))
_register('lqr', 'lqr_6_2',
          lambda **kw: lqr.Lqr(n_masses=6, n_actuated=2, **kw),
          tags=('extra',), dims=(12, 2, 12))

BENCHMARKING = tuple((e.domain, e.task) for e in _REGISTRY.values()
                     if 'benchmarking' in e.tags)
EXTRA = tuple((e.domain, e.task) for e in _REGISTRY.values()
              if 'extra' in e.tags)
ALL_TASKS = tuple((e.domain, e.task) for e in _REGISTRY.values())

EPISODE_STEPS = base.EPISODE_STEPS


def entries(tag='all'):
  if tag == 'all':
    return list(_REGISTRY.values())
  if tag in ('benchmarking', 'extra'):
    return [e for e in _REGISTRY.values() if tag in e.tags]
  raise errors.Error(f"unknown tag '{tag}'; use benchmarking, extra or all")


def load(domain_name, task_name, task_kwargs=None, visualize_reward=False,
         seed=None):
  """Builds the environment for a registered (domain, task) pair.

  Episodes run for 1000 control steps unless the task terminates earlier
  (only LQR does). `seed` fixes the episode random stream.
  """
  entry = _REGISTRY.get((domain_name, task_name))
  if entry is None:
    known = ', '.join(f'{d}:{t}' for d, t in ALL_TASKS)
    raise errors.UnknownNameError(
        f"no task '{domain_name}:{task_name}'; available: {known}")
  kwargs = dict(task_kwargs or {})
  task = entry.factory(visualize_reward=visualize_reward, **kwargs)
  time_limit = EPISODE_STEPS * task.control_timestep
  return composer.Environment(task, time_limit=time_limit,
                              random_state=np.random.RandomState(seed))


__all__ = ['ALL_TASKS', 'BENCHMARKING', 'EXTRA', 'EPISODE_STEPS',
           'TaskEntry', 'entries', 'load', 'riccati', 'lqr']
