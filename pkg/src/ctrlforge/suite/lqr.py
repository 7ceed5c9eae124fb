"""Linear-quadratic regulator: n spring-coupled masses, m actuated.

The masses slide on linear joints connected serially, with springs acting
on each joint's relative displacement. The discrete-time transition
(A, B) is the exact zero-order-hold discretization of the analytic linear
dynamics at the task timestep, and the environment steps that discrete
system directly, so the optimal value function from the Riccati solver is
exact for the simulated process.

Reward is -(x'Qx + u'Ru) * h: quadratic in positions and controls,
unbounded below, so LQR is excluded from benchmarking and from the
unit-interval reward convention. The episode terminates with discount 0
once the state is within 1e-4 of the origin (in the infinity norm), as a
proxy for the exponential convergence of a stabilised linear system.
"""

import dataclasses

import numpy as np
from scipy import linalg as scipy_linalg

from ctrlforge import composer
from ctrlforge import mjcf
from ctrlforge.suite import base
from ctrlforge.suite import riccati

_TIMESTEP = 0.01
_MASS = 0.05
_STIFFNESS = 10.0
_DAMPING = 4.0
_SPACING = 0.25
_CONTROL_COST = 0.1
_TERMINATION_RADIUS = 1e-4


@dataclasses.dataclass(frozen=True)
class LqrSpec:
  """Discrete-time system and cost matrices of the mass chain."""
  n_masses: int
  n_actuated: int
  a: np.ndarray          # (2n, 2n)
  b: np.ndarray          # (2n, m)
  q: np.ndarray          # (2n, 2n), PSD (positions only)
  r: np.ndarray          # (m, m), PD
  timestep: float

  @property
  def a_continuous(self):
    return _continuous_dynamics(self.n_masses)[0]

  @property
  def b_continuous(self):
    return _continuous_dynamics(self.n_masses, self.n_actuated)[1]


def _mass_matrix(n):
  # Serial chain of slide joints along one axis: joint j moves every mass
  # at or beyond it, so M[i, j] counts the masses past max(i, j).
  idx = np.arange(n)
  return _MASS * (n - np.maximum(idx[:, None], idx[None, :]))


def _continuous_dynamics(n, m=None):
  m = n if m is None else m
  mass = _mass_matrix(n)
  stiffness = _STIFFNESS * np.eye(n)
  damping = _DAMPING * np.eye(n)
  select = np.zeros((n, m))
  select[:m, :m] = np.eye(m)
  minv = np.linalg.inv(mass)
  a_c = np.zeros((2 * n, 2 * n))
  a_c[:n, n:] = np.eye(n)
  a_c[n:, :n] = -minv @ stiffness
  a_c[n:, n:] = -minv @ damping
  b_c = np.zeros((2 * n, m))
  b_c[n:, :] = minv @ select
  return a_c, b_c


def make_spec(n_masses, n_actuated, timestep=_TIMESTEP):
  """Exact zero-order-hold discretization of the chain dynamics."""
  if not 1 <= n_actuated <= n_masses:
    raise ValueError(
        f'need 1 <= m <= n, got n={n_masses}, m={n_actuated}')
  n, m = n_masses, n_actuated
  a_c, b_c = _continuous_dynamics(n, m)
  block = np.zeros((2 * n + m, 2 * n + m))
  block[:2 * n, :2 * n] = a_c
  block[:2 * n, 2 * n:] = b_c
  phi = scipy_linalg.expm(block * timestep)
  a = phi[:2 * n, :2 * n]
  b = phi[:2 * n, 2 * n:]
  q = np.zeros((2 * n, 2 * n))
  q[:n, :n] = np.eye(n)
  r = _CONTROL_COST * np.eye(m)
  return LqrSpec(n_masses=n, n_actuated=m, a=a, b=b, q=q, r=r,
                 timestep=timestep)


def solve(spec, tol=1e-12, max_iter=10**6):
  return riccati.solve_dare(spec.a, spec.b, spec.q, spec.r, tol=tol,
                            max_iter=max_iter)


def build_model(n_masses, n_actuated):
  model = mjcf.RootElement(model='lqr')
  model.compiler.angle = 'radian'
  model.option.timestep = _TIMESTEP
  model.option.integrator = 'rk4'
  model.option.gravity = [0, 0, 0]
  model.worldbody.add('light', name='top', pos=[0, 0, 2])
  model.worldbody.add('camera', name='side',
                      pos=[_SPACING * n_masses / 2, -1.5, 0.5],
                      euler=[np.radians(75), 0, 0], fovy=50)
  parent = model.worldbody
  joints = []
  for i in range(n_masses):
    body = parent.add('body', name=f'mass_{i + 1}',
                      pos=[_SPACING if i else 0.0, 0, 0])
    joint = body.add('joint', name=f'slide_{i + 1}', type='slide',
                     axis=[1, 0, 0], stiffness=_STIFFNESS,
                     damping=_DAMPING)
    body.add('geom', name=f'mass_{i + 1}', type='box',
             size=[0.05, 0.05, 0.05], mass=_MASS,
             rgba=[0.4, 0.6, 0.9, 1])
    joints.append(joint)
    parent = body
  for i in range(n_actuated):
    model.actuator.add('motor', name=f'motor_{i + 1}', joint=joints[i],
                       gear=1)
  return model, joints


class Lqr(base.SuiteTask):
  """The LQR task over the exactly discretized chain."""

  def __init__(self, n_masses=2, n_actuated=1, visualize_reward=False):
    model, joints = build_model(n_masses, n_actuated)
    super().__init__(model, visualize_reward)
    self.control_timestep = _TIMESTEP     # single substep per step
    self._joints = joints
    self._spec = make_spec(n_masses, n_actuated)
    self._last_u = np.zeros(n_actuated)
    self._observables = {
        'position': composer.Generic(self._position, enabled=True),
        'velocity': composer.Generic(self._velocity, enabled=True),
    }

  @property
  def lqr_spec(self):
    return self._spec

  @property
  def task_observables(self):
    return self._observables

  def _position(self, physics):
    return physics.data.qpos.copy()

  def _velocity(self, physics):
    return physics.data.qvel.copy()

  def _state(self, physics):
    return np.concatenate([physics.data.qpos, physics.data.qvel])

  def initialize_episode(self, physics, random_state):
    super().initialize_episode(physics, random_state)
    physics.data.qpos[:] = random_state.uniform(-1, 1,
                                                self._spec.n_masses)
    self._last_u = np.zeros(self._spec.n_actuated)
    physics.forward()

  def before_step(self, physics, action, random_state):
    self._last_u = np.asarray(action, dtype=float)
    physics.set_control(self._last_u)

  def physics_substep(self, physics):
    # Exact discrete transition instead of numerical integration.
    n = self._spec.n_masses
    x = self._spec.a @ self._state(physics) + self._spec.b @ self._last_u
    physics.data.qpos[:] = x[:n]
    physics.data.qvel[:] = x[n:]
    physics.forward()

  def compute_reward(self, physics):
    x = self._state(physics)
    u = self._last_u
    stage = float(x @ (self._spec.q @ x) + u @ (self._spec.r @ u))
    return -stage * self._spec.timestep

  def compute_discount(self, physics):
    return 0.0 if self._converged(physics) else 1.0

  def compute_termination(self, physics):
    return self._converged(physics)

  def _converged(self, physics):
    return float(np.max(np.abs(self._state(physics)))) < _TERMINATION_RADIUS
