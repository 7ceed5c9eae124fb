"""Time integration of the simulation state.

Two integrators are provided: semi-implicit Euler (velocity first, then
position with the new velocity) and classic 4th-order Runge-Kutta on the
(qpos, qvel) pair with the control held constant over the step.
"""

import numpy as np

from ctrlforge import errors
from ctrlforge.engine import dynamics

INTEGRATORS = ('euler', 'rk4')


def step(model, data, state, scratch, method=None, applied=None):
  """Advances `state` in place by one timestep of length model.timestep.

  `data` must hold current forward kinematics for state.qpos and is left
  holding the force-stage quantities of the transition (qacc, actuator and
  passive forces), while position-stage quantities are NOT updated for the
  new state; callers re-run the position stage afterwards. `scratch` is a
  DerivedData used for intermediate Runge-Kutta evaluations.

  Raises DivergenceError if the step produces non-finite state.
  """
  method = method or model.integrator
  h = model.timestep
  if method == 'euler':
    qacc = dynamics.dynamics_stage(model, data, state.qpos, state.qvel,
                                   state.ctrl, applied)
    state.qvel += h * qacc
    state.qpos += h * state.qvel
  elif method == 'rk4':
    q0, v0 = state.qpos.copy(), state.qvel.copy()
    ctrl = state.ctrl
    # Record transition forces at the initial state in `data`.
    k1v = dynamics.dynamics_stage(model, data, q0, v0, ctrl, applied).copy()
    k1q = v0
    k2v = dynamics.qacc_at(model, scratch, q0 + 0.5 * h * k1q,
                           v0 + 0.5 * h * k1v, ctrl, applied)
    k2q = v0 + 0.5 * h * k1v
    k3v = dynamics.qacc_at(model, scratch, q0 + 0.5 * h * k2q,
                           v0 + 0.5 * h * k2v, ctrl, applied)
    k3q = v0 + 0.5 * h * k2v
    k4v = dynamics.qacc_at(model, scratch, q0 + h * k3q, v0 + h * k3v,
                           ctrl, applied)
    k4q = v0 + h * k3v
    state.qpos[:] = q0 + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
    state.qvel[:] = v0 + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
  else:
    raise errors.Error(f"unknown integrator '{method}'")
  state.time += h
  if not (np.isfinite(state.qpos).all() and np.isfinite(state.qvel).all()):
    raise errors.DivergenceError(
        f'simulation diverged at time {state.time:.6g}s '
        f'(step {round(state.time / h)}): non-finite state')
  return state
