"""Discrete-time LQR synthesis by Riccati fixed-point iteration."""

import dataclasses

import numpy as np

from ctrlforge import errors


@dataclasses.dataclass(frozen=True)
class RiccatiSolution:
  """Solution of the discrete algebraic Riccati equation.

  P is the optimal quadratic value matrix, K the state-feedback gain of
  the optimal policy u = -K x. `residual` is the infinity norm of the last
  fixed-point update.
  """
  value_matrix: np.ndarray     # P, (n, n) symmetric PSD
  gain: np.ndarray             # K, (m, n)
  iterations: int
  residual: float


def solve_dare(a, b, q, r, tol=1e-12, max_iter=10**6):
  """Solves P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA by iteration from P=Q.

  Args:
    a: (n, n) state transition matrix.
    b: (n, m) control matrix (m may be zero: pure Lyapunov case).
    q: (n, n) state cost, symmetric PSD.
    r: (m, m) control cost, symmetric positive definite.
    tol: infinity-norm convergence threshold on the P update.
    max_iter: iteration cap.

  Returns:
    RiccatiSolution with K = (R + B'PB)^-1 B'PA.

  Raises:
    errors.Error on dimension mismatch, non-PD R, or non-convergence
    (reported with the final residual).
  """
  a = np.atleast_2d(np.asarray(a, dtype=float))
  b = np.asarray(b, dtype=float)
  if b.ndim == 1:
    b = b[:, None]
  q = np.atleast_2d(np.asarray(q, dtype=float))
  r = np.atleast_2d(np.asarray(r, dtype=float))
  n = a.shape[0]
  m = b.shape[1]
  if a.shape != (n, n) or b.shape != (n, m) or q.shape != (n, n):
    raise errors.Error(
        f'inconsistent shapes: A{a.shape} B{b.shape} Q{q.shape}')
  if r.shape != (m, m):
    raise errors.Error(f'R must be ({m}, {m}), got {r.shape}')
  if m and (np.any(np.linalg.eigvalsh((r + r.T) / 2) <= 0)):
    raise errors.Error('R must be positive definite')

  p = q.copy()
  residual = np.inf
  for iteration in range(1, int(max_iter) + 1):
    pa = p @ a
    pb = p @ b
    gain = np.linalg.solve(r + b.T @ pb, b.T @ pa) if m else \
        np.zeros((0, n))
    p_next = q + a.T @ pa - (a.T @ pb) @ gain
    p_next = (p_next + p_next.T) / 2.0
    residual = float(np.max(np.abs(p_next - p)))
    p = p_next
    if residual < tol:
      gain = np.linalg.solve(r + b.T @ (p @ b), b.T @ (p @ a)) if m else \
          np.zeros((0, n))
      return RiccatiSolution(value_matrix=p, gain=gain,
                             iterations=iteration, residual=residual)
  raise errors.Error(
      f'Riccati iteration did not converge in {max_iter} iterations '
      f'(last residual {residual:.3e})')


def dare_residual(solution, a, b, q, r):
  """Infinity norm of the DARE defect of a solution (for verification)."""
  p = solution.value_matrix
  m = b.shape[1] if b.ndim == 2 else 1
  b = b.reshape(len(a), m)
  defect = q + a.T @ p @ a - p
  if m:
    correction = (a.T @ p @ b) @ np.linalg.solve(r + b.T @ p @ b,
                                                 b.T @ p @ a)
    defect = defect - correction
  return float(np.max(np.abs(defect)))
