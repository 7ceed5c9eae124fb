"""Touring the benchmark suite with a random agent.

Non-LQR tasks keep rewards in [0, 1] over fixed 1000-step episodes, so
every return lands in [0, 1000] and learning curves share one y-axis.
"""

import numpy as np

from ctrlforge import suite

print(f'{len(suite.BENCHMARKING)} benchmarking tasks, '
      f'{len(suite.EXTRA)} extra tasks\n')

print(f'{"task":24s} {"dims (S,A,O)":14s} random-agent return')
for domain, task in suite.BENCHMARKING:
  env = suite.load(domain, task, seed=0)
  spec = env.action_spec()
  rng = np.random.RandomState(0)
  timestep = env.reset()
  episode_return = 0.0
  # Shorter roll here to keep the demo quick; episodes run 1000 steps.
  for _ in range(200):
    action = rng.uniform(spec.minimum, spec.maximum, spec.shape)
    timestep = env.step(action)
    episode_return += timestep.reward
  model = env.physics.model
  dims = (model.nq + model.nv, spec.shape[0],
          sum(int(np.prod(s.shape)) for s in env.observation_spec().values()))
  print(f'{domain + ":" + task:24s} {str(dims):14s} '
        f'{episode_return:8.2f} (200 steps)')
