"""Dense-tableau two-phase simplex with Bland's anti-cycling rule.

Problems are in equality standard form::

    minimise  c @ x   subject to  A @ x = b,  x >= 0

The pivoting loop lives in :mod:`jointreality.kernels`; this module builds
tableaux, handles redundant rows left over from phase 1 and extracts
solutions. It is sized for the small problems in this package (tens of
variables), not as a general LP library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded" or "iteration_limit"
    x: np.ndarray | None
    objective: float | None
    phase1_objective: float
    iterations: int


def _max_iter(m: int, n: int) -> int:
    return 50 * (m + n) + 100


def phase_one(A, b, tol: float = TOL):
    """Find a basic feasible solution of A x = b, x >= 0.

    Returns ``(tableau, basis, phase1_objective, iterations)``; the tableau
    has artificial columns removed and redundant rows dropped whenever the
    phase-1 objective is within ``tol`` of zero. Otherwise the tableau is
    ``None``.
    """
    A = np.array(A, dtype=np.float64, ndmin=2)
    b = np.array(b, dtype=np.float64).reshape(-1)
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError(f"A has {m} rows but b has {b.shape[0]} entries")
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)

    status, iters = kernels.simplex_iterate(T, basis, n + m, tol, _max_iter(m, n))
    if status == kernels.ITERATION_LIMIT:
        raise RuntimeError("phase 1 did not converge within the iteration limit")
    objective = max(0.0, -float(T[m, -1]))
    if objective > tol:
        return None, basis, objective, iters

    # pivot remaining artificials out of the basis; rows where that is
    # impossible are linearly dependent and get dropped
    keep = []
    for i in range(m):
        if basis[i] >= n:
            candidates = np.flatnonzero(np.abs(T[i, :n]) > tol)
            if candidates.size == 0:
                continue
            kernels.pivot(T, i, int(candidates[0]))
            basis[i] = candidates[0]
        keep.append(i)
    rows = keep + [m]
    cols = list(range(n)) + [n + m]
    T2 = np.ascontiguousarray(T[np.ix_(rows, cols)])
    return T2, np.ascontiguousarray(basis[keep]), objective, iters


def _extract(T, basis, n) -> np.ndarray:
    x = np.zeros(n)
    x[basis] = T[:-1, -1]
    return x


def solve(c, A, b, tol: float = TOL) -> LPResult:
    """Minimise ``c @ x`` subject to ``A @ x = b`` and ``x >= 0``."""
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    A = np.array(A, dtype=np.float64, ndmin=2)
    n = A.shape[1]
    if c.shape[0] != n:
        raise ValueError(f"c has {c.shape[0]} entries for {n} variables")
    T, basis, p1, it1 = phase_one(A, b, tol)
    if T is None:
        return LPResult("infeasible", None, None, p1, it1)

    m = T.shape[0] - 1
    T[m, :n] = c - c[basis] @ T[:m, :n]
    T[m, -1] = -c[basis] @ T[:m, -1]
    status, it2 = kernels.simplex_iterate(T, basis, n, tol, _max_iter(m, n))
    iters = it1 + it2
    if status == kernels.UNBOUNDED:
        return LPResult("unbounded", None, None, p1, iters)
    if status == kernels.ITERATION_LIMIT:
        return LPResult("iteration_limit", None, None, p1, iters)
    x = _extract(T, basis, n)
    return LPResult("optimal", x, float(c @ x), p1, iters)


def feasibility(A, b, tol: float = TOL) -> LPResult:
    """Phase 1 only: is {x >= 0 : A x = b} nonempty?"""
    A = np.array(A, dtype=np.float64, ndmin=2)
    n = A.shape[1]
    T, basis, p1, iters = phase_one(A, b, tol)
    if T is None:
        return LPResult("infeasible", None, None, p1, iters)
    return LPResult("optimal", _extract(T, basis, n), 0.0, p1, iters)
