"""Reward shaping with tolerance() and its sigmoid profiles.

tolerance(x, bounds, margin, sigmoid, value_at_margin) is 1 inside the
bounds and decays to value_at_margin at a distance of margin. Outputs
stay in [0, 1], so rewards compose by products and averages.
"""

import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from ctrlforge.rl import rewards

x = np.linspace(-3, 3, 601)

fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
for kind in ('gaussian', 'hyperbolic', 'long_tail', 'tanh_squared'):
  top.plot(x, rewards.tolerance(x, bounds=(-0.5, 0.5), margin=1.0,
                                sigmoid=kind, value_at_margin=0.1),
           label=kind)
top.set_title('infinite support (value_at_margin = 0.1)')
top.legend()

for kind in rewards.FINITE_SUPPORT:
  bottom.plot(x, rewards.tolerance(x, bounds=(-0.5, 0.5), margin=1.0,
                                   sigmoid=kind, value_at_margin=0.0),
              label=kind)
bottom.set_title('finite support (value_at_margin = 0): zero beyond '
                 'the margin')
bottom.legend()

out_dir = os.path.join(os.path.dirname(__file__), 'out')
os.makedirs(out_dir, exist_ok=True)
path = os.path.join(out_dir, 'tolerance_profiles.png')
fig.savefig(path, dpi=110)
print('wrote', path)

# A shaped forward-velocity reward, linear up to a target speed:
for v in (0, 5, 10, 15):
  r = rewards.tolerance(v, bounds=(10, float('inf')), margin=10,
                        value_at_margin=0, sigmoid='linear')
  print(f'forward-velocity reward at v={v:>2} m/s: {r}')
