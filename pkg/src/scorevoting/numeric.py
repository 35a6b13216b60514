"""Exact linear algebra kernel.

Contains a dense two-phase simplex over :class:`~fractions.Fraction` using
Bland's rule, the margin-maximisation LP used to decide strict linear
feasibility, and the closed-form half-space projection used by the
alternating-projection solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, PreconditionError

MAX_LP_VARIABLES = 400

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass
class LinearSystem:
    """Rows ``(coefficients, rhs)`` over ``d`` variables.

    A strict row asks ``a.x - rhs >= t`` for the common margin ``t``; weak rows
    ask ``a.x - rhs >= 0`` and equality rows ``a.x - rhs == 0``.
    """

    d: int
    strict_rows: list = field(default_factory=list)
    weak_rows: list = field(default_factory=list)
    equality_rows: list = field(default_factory=list)

    def __post_init__(self):
        for rows in (self.strict_rows, self.weak_rows, self.equality_rows):
            for i, (a, b) in enumerate(rows):
                if len(a) != self.d:
                    raise DomainError(f"row of length {len(a)} in a system of dimension {self.d}")
                rows[i] = (tuple(Fraction(v) for v in a), Fraction(b))

    def add_strict(self, a, rhs=0):
        self._add(self.strict_rows, a, rhs)

    def add_weak(self, a, rhs=0):
        self._add(self.weak_rows, a, rhs)

    def add_equality(self, a, rhs=0):
        self._add(self.equality_rows, a, rhs)

    def _add(self, rows, a, rhs):
        if len(a) != self.d:
            raise DomainError(f"row of length {len(a)} in a system of dimension {self.d}")
        rows.append((tuple(Fraction(v) for v in a), Fraction(rhs)))


class _Tableau:
    """Dense simplex tableau for ``max c.x, A x = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, A, b, n_real):
        self.rows = [list(r) + [bi] for r, bi in zip(A, b)]
        self.ncols = len(A[0]) if A else n_real
        self.n_real = n_real
        self.basis = []

    def pivot(self, r, c):
        row = self.rows[r]
        p = row[c]
        if p != 1:
            self.rows[r] = row = [v / p for v in row]
        for i, other in enumerate(self.rows):
            if i != r and other[c] != 0:
                f = other[c]
                self.rows[i] = [o - f * v for o, v in zip(other, row)]
        if self.obj[c] != 0:
            f = self.obj[c]
            self.obj = [o - f * v for o, v in zip(self.obj, row)]
        self.basis[r] = c

    def set_objective(self, c):
        # obj[j] holds minus the reduced cost; the last entry is the objective value
        self.obj = [-v for v in c] + [_ZERO]
        for r, j in enumerate(self.basis):
            if self.obj[j] != 0:
                f = self.obj[j]
                self.obj = [o - f * v for o, v in zip(self.obj, self.rows[r])]

    def run(self, allowed):
        """Bland's rule; returns False when the objective is unbounded."""
        while True:
            enter = next((j for j in allowed if self.obj[j] < 0), None)
            if enter is None:
                return True
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return False
            self.pivot(best[1], enter)


def simplex_max(c, A_ub=(), b_ub=(), A_eq=(), b_eq=()):
    """Maximise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Returns ``(status, x, value)`` with status ``"optimal"``, ``"infeasible"``
    or ``"unbounded"``. All arithmetic is exact.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    rows, rhs = [], []
    n_ub = len(A_ub)
    for i, (a, bi) in enumerate(zip(A_ub, b_ub)):
        slack = [_ZERO] * n_ub
        slack[i] = _ONE
        rows.append([Fraction(v) for v in a] + slack)
        rhs.append(Fraction(bi))
    for a, bi in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in a] + [_ZERO] * n_ub)
        rhs.append(Fraction(bi))
    n_std = n + n_ub
    if not rows:
        if any(v > 0 for v in c):
            return "unbounded", None, None
        return "optimal", [_ZERO] * n, _ZERO
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    k = len(rows)
    A = [r + [_ONE if j == i else _ZERO for j in range(k)] for i, r in enumerate(rows)]
    tab = _Tableau(A, rhs, n_std)
    tab.basis = list(range(n_std, n_std + k))
    tab.set_objective([_ZERO] * n_std + [-_ONE] * k)
    tab.run(range(n_std + k))
    if tab.obj[-1] != 0:
        return "infeasible", None, None

    # drive zero-level artificials out of the basis, dropping redundant rows
    r = 0
    while r < len(tab.rows):
        j = tab.basis[r]
        if j >= n_std:
            col = next((q for q in range(n_std) if tab.rows[r][q] != 0), None)
            if col is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, col)
        r += 1
    # freeze artificial columns at zero
    tab.rows = [row[:n_std] + [row[-1]] for row in tab.rows]
    tab.set_objective(c + [_ZERO] * n_ub)
    if not tab.run(range(n_std)):
        return "unbounded", None, None
    x = [_ZERO] * n_std
    for r, j in enumerate(tab.basis):
        x[j] = tab.rows[r][-1]
    x = x[:n]
    value = sum((ci * xi for ci, xi in zip(c, x)), _ZERO)
    return "optimal", x, value


def lp_max_margin(system: LinearSystem, normalize: bool = True):
    """Maximise the common margin ``t`` of the strict rows.

    Variables are non-negative and, when ``normalize`` is set, sum to one.
    Returns ``(point, margin)`` or ``None`` when even the weak relaxation
    (``t`` free) is infeasible. Without strict rows the margin is reported as
    0 and the point is any feasible one.
    """
    d = system.d
    if d > MAX_LP_VARIABLES:
        raise PreconditionError(f"{d} variables exceed the LP bound {MAX_LP_VARIABLES}")
    has_t = bool(system.strict_rows)
    nv = d + (2 if has_t else 0)  # t = t_plus - t_minus
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for a, rhs in system.strict_rows:
        A_ub.append([-v for v in a] + [_ONE, -_ONE])
        b_ub.append(-rhs)
    for a, rhs in system.weak_rows:
        A_ub.append([-v for v in a] + [_ZERO] * (nv - d))
        b_ub.append(-rhs)
    for a, rhs in system.equality_rows:
        A_eq.append(list(a) + [_ZERO] * (nv - d))
        b_eq.append(rhs)
    if normalize:
        A_eq.append([_ONE] * d + [_ZERO] * (nv - d))
        b_eq.append(_ONE)
    c = [_ZERO] * d + ([_ONE, -_ONE] if has_t else [])
    status, x, value = simplex_max(c, A_ub, b_ub, A_eq, b_eq)
    if status == "infeasible":
        return None
    if status == "unbounded":
        raise PreconditionError("margin is unbounded; normalise the variables")
    return x[:d], (value if has_t else _ZERO)


def scale_to_integer(point: Sequence[Fraction]) -> list:
    """Multiply a non-negative rational vector by the LCM of its denominators."""
    pts = [Fraction(p) for p in point]
    if any(p < 0 for p in pts):
        raise DomainError("scale_to_integer expects non-negative entries")
    lcm = 1
    for p in pts:
        lcm = lcm * p.denominator // math.gcd(lcm, p.denominator)
    return [int(p * lcm) for p in pts]


def halfspace_project(point, row, rhs, kind: str = "<=") -> np.ndarray:
    """Euclidean projection onto ``{x : a.x <= b}`` or ``{x : a.x = b}``."""
    x = np.asarray(point, dtype=float)
    a = np.asarray(row, dtype=float)
    nrm = float(a @ a)
    if nrm == 0.0:
        raise DomainError("cannot project onto a constraint with a zero row")
    if kind not in ("<=", "="):
        raise DomainError(f"unknown constraint kind {kind!r}")
    excess = float(a @ x) - rhs
    if kind == "<=" and excess <= 0:
        return x.copy()
    return x - (excess / nrm) * a


def solve_exact(A, b) -> Optional[list]:
    """Solve a square rational system by Gauss-Jordan; ``None`` if singular."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def independent_rows(rows) -> list:
    """Indices of a maximal linearly independent subset of ``rows`` (exact)."""
    basis = []  # reduced rows with pivot columns
    keep = []
    for idx, row in enumerate(rows):
        r = [Fraction(v) for v in row]
        for piv, br in basis:
            if r[piv] != 0:
                f = r[piv] / br[piv]
                r = [x - f * y for x, y in zip(r, br)]
        piv = next((j for j, v in enumerate(r) if v != 0), None)
        if piv is not None:
            basis.append((piv, r))
            keep.append(idx)
    return keep
