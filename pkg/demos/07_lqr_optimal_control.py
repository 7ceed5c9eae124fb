"""The LQR domain: analytic dynamics, Riccati synthesis, optimal rollout.

The spring-mass chain has exact discrete-time transition matrices, so the
value function from the Riccati solver predicts the simulated cost to
machine precision, and the optimal policy drives the environment to its
gamma=0 termination.
"""

import numpy as np

from ctrlforge import suite
from ctrlforge.suite import lqr

env = suite.load('lqr', 'lqr_6_2', seed=0)
spec = env.task.lqr_spec
solution = lqr.solve(spec)
print(f'Riccati iterations: {solution.iterations}, '
      f'residual {solution.residual:.2e}')
print('gain matrix K:')
print(np.round(solution.gain, 3))

timestep = env.reset()
x0 = np.concatenate([timestep.observation['position'],
                     timestep.observation['velocity']])
predicted_cost = float(x0 @ (solution.value_matrix @ x0))

# Each reward pays the post-transition state cost, so the value of the
# start state is the initial state cost plus the accumulated rewards.
total_cost = float(x0 @ (spec.q @ x0))
steps = 0
while not timestep.last():
  x = np.concatenate([timestep.observation['position'],
                      timestep.observation['velocity']])
  timestep = env.step(-solution.gain @ x)
  total_cost += -timestep.reward / spec.timestep
  steps += 1

print(f'\noptimal policy terminated with discount {timestep.discount} '
      f'after {steps} steps')
print(f'value prediction x0\' P x0 = {predicted_cost:.6f}')
print(f'accumulated simulated cost = {total_cost:.6f}')
assert abs(total_cost - predicted_cost) / predicted_cost < 1e-6
