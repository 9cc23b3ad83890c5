"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly and are used when the compiled
extension is unavailable. Quartet arrays have shape (n, 8) with columns
(a_ep, b_ep, a_em, b_em, a_epp, b_epp, a_epm, b_epm).
"""

import numpy as np

BACKEND = "python"

# simplex_iterate status codes
OPTIMAL, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2


def _det4_ones(a, b, c):
    """Determinant of the 4x4 matrix with rows (a[i], b[i], c[i], 1).

    Laplace expansion over the first two columns; ``a``, ``b``, ``c`` are
    sequences of four arrays (or scalars) indexed by row.
    """
    return (
        (a[0] * b[1] - a[1] * b[0]) * (c[2] - c[3])
        - (a[0] * b[2] - a[2] * b[0]) * (c[1] - c[3])
        + (a[0] * b[3] - a[3] * b[0]) * (c[1] - c[2])
        + (a[1] * b[2] - a[2] * b[1]) * (c[0] - c[3])
        - (a[1] * b[3] - a[3] * b[1]) * (c[0] - c[2])
        + (a[2] * b[3] - a[3] * b[2]) * (c[0] - c[1])
    )


def tau_batch(quartets, signs):
    """Max over sign choices of the determinant criterion, row-wise.

    ``signs`` is an (k, 4) integer array of (p, q, r, s). Returns
    ``(tau, argmax)`` where ties resolve to the first sign choice.
    """
    Q = np.ascontiguousarray(quartets, dtype=np.float64)
    signs = np.asarray(signs, dtype=np.float64)
    a_ep, b_ep, a_em, b_em, a_epp, b_epp, a_epm, b_epm = Q.T
    # row order: eps_+, eps'_+, eps'_-, eps_-
    a = (a_ep, a_epp, a_epm, a_em)
    b = (b_ep, b_epp, b_epm, b_em)
    dets = np.empty((Q.shape[0], signs.shape[0]))
    for k, (p, q, r, s) in enumerate(signs):
        c = (
            p * a_ep + q * b_ep - 1.0,
            r * a_epp + s * b_epp + 1.0,
            -r * a_epm - s * b_epm + 1.0,
            -p * a_em - q * b_em - 1.0,
        )
        dets[:, k] = _det4_ones(a, b, c)
    idx = np.argmax(dets, axis=1)
    return dets[np.arange(Q.shape[0]), idx], idx.astype(np.int64)


def ell_batch(quartets):
    """Max over c of the linear criterion, row-wise; returns (ell, c_star)."""
    Q = np.ascontiguousarray(quartets, dtype=np.float64)
    a_ep, b_ep, a_em, b_em, a_epp, b_epp, a_epm, b_epm = Q.T
    dec = np.minimum(a_ep + b_ep - 1.0, -a_em - b_em - 1.0)
    inc = np.minimum(a_epp - b_epp - 1.0, -a_epm + b_epm - 1.0)
    c_star = np.clip((dec - inc) / 2.0, -1.0, 1.0)
    ell = np.minimum(dec - c_star, inc + c_star)
    return ell, c_star


def pivot(T, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def simplex_iterate(T, basis, n_enter, tol, max_iter):
    """Run primal simplex pivots with Bland's rule on a dense tableau.

    ``T`` has constraint rows ``[A | b]`` followed by one reduced-cost row
    (minimisation; last entry is minus the objective). Only columns below
    ``n_enter`` may enter the basis. ``T`` and ``basis`` are modified in
    place. Returns ``(status, iterations)``.
    """
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[m, :n_enter]
        candidates = np.flatnonzero(cost < -tol)
        if candidates.size == 0:
            return OPTIMAL, it
        col = int(candidates[0])
        column = T[:m, col]
        best_row = -1
        best_ratio = np.inf
        for i in range(m):
            if column[i] > tol:
                ratio = T[i, -1] / column[i]
                if ratio < best_ratio - tol or (
                    ratio <= best_ratio + tol and basis[i] < basis[best_row]
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            return UNBOUNDED, it
        pivot(T, best_row, col)
        basis[best_row] = col
    return ITERATION_LIMIT, max_iter
