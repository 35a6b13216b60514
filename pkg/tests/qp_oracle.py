"""Exhaustive active-set solver for small homogeneous projection problems.

Minimises ||x - m||^2 subject to A x <= 0 and E x = 0 by trying every subset
of the inequality rows as the active set and keeping the nearest feasible
candidate. Exponential in the number of rows; meant for m <= 3.
"""

import itertools

import numpy as np


def project_subspace(m, rows):
    if len(rows) == 0:
        return m.copy()
    R = np.asarray(rows, dtype=float)
    lam, *_ = np.linalg.lstsq(R @ R.T, R @ m, rcond=None)
    return m - R.T @ lam


def exhaustive_projection(m, A, E=None, feas_tol=1e-9):
    m = np.asarray(m, dtype=float)
    A = np.asarray(A, dtype=float)
    E = np.zeros((0, m.size)) if E is None or len(E) == 0 else np.asarray(E, dtype=float)
    best, best_d = None, np.inf
    for r in range(min(len(A), m.size) + 1):
        for act in itertools.combinations(range(len(A)), r):
            rows = np.vstack([A[list(act)], E]) if act else E
            x = project_subspace(m, rows)
            if np.all(A @ x <= feas_tol) and np.all(np.abs(E @ x) <= feas_tol):
                d = float(np.linalg.norm(x - m))
                if d < best_d:
                    best, best_d = x, d
    return best, best_d
