"""Nearest strategyproof score matrix under the Frobenius norm.

The closure of the ``delta_plus`` region is a polyhedral cone in the ``m*m``
matrix entries (every row is homogeneous): the diagonal bounds and triple
inequalities become weak inequalities and the column-difference identities
stay equalities. A matrix is projected on it with Dykstra's alternating
projections, the result is rounded to rationals, and if the strict
inequalities fail exactly, a grid cover of a small sphere around the
projection is searched for a strictly feasible point.

Floating point is confined to this module; every verdict is re-checked on
rationals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, NumericError, PreconditionError, ResourceLimitError
from .model import fraction_to_json
from .numeric import independent_rows, solve_exact
from .properties import TOTAL_MAX_OBJECTS, check_delta_plus, is_total
from .score import ScoreFunction, ScoreMatrix, TieBreak

EXACT_PROJECTION = "ExactProjection"
SPHERE_REPAIRED = "SphereRepaired"
NO_STRICT_POINT = "NoStrictPoint"
NOT_TOTAL = "NotTotal"

DEFAULT_DELTA = 1e-2
DEFAULT_EPS = 1e-3
DEFAULT_TOL = 1e-9
MAX_SWEEPS = 1_000_000
MAX_COVER_POINTS = 5_000_000
DENOMINATOR_CAP = 10**6
_CHUNK = 200_000
_KEEP = 256  # float-feasible cover points kept for the exact check


# -- constraint system -----------------------------------------------------


@dataclass(frozen=True)
class ClosureSystem:
    """Rows over the row-major flattened matrix: ``a.x <= 0`` and ``e.x == 0``.

    ``strict[r]`` marks inequality rows that are strict in the open region.
    """

    m: int
    inequalities: tuple
    strict: tuple
    equalities: tuple

    @property
    def d(self) -> int:
        return self.m * self.m

    def A(self) -> np.ndarray:
        return np.array(self.inequalities, dtype=float).reshape(len(self.inequalities), self.d)

    def E(self) -> np.ndarray:
        return np.array(self.equalities, dtype=float).reshape(len(self.equalities), self.d)

    def residual(self, x) -> float:
        """Largest violation of any row at ``x``."""
        x = np.asarray(x, dtype=float)
        r = 0.0
        if self.inequalities:
            r = max(r, float(np.max(self.A() @ x)))
        if self.equalities:
            r = max(r, float(np.max(np.abs(self.E() @ x))))
        return max(r, 0.0)


def closure_system(m: int, tiebreak: TieBreak, distinct_only: bool = True) -> ClosureSystem:
    """Constraint rows of the closed ``delta_plus`` region, deduplicated.

    Zero rows (triples with ``k == i`` or ``j == i``) are dropped; a row that
    appears both weak and strict is kept once, as strict.
    """
    if tiebreak.m != m:
        raise DomainError("tie-break size differs from m")

    def idx(i, j):
        return i * m + j

    ineq = {}
    for i in range(m):
        for j in range(m):
            for k in range(m):
                row = [0] * (m * m)
                # (M_ki - M_kj) - (M_ii - M_ij) <= 0
                row[idx(k, i)] += 1
                row[idx(k, j)] -= 1
                row[idx(i, i)] -= 1
                row[idx(i, j)] += 1
                if any(row):
                    ineq.setdefault(tuple(row), False)
    for i in range(m):
        for j in range(m):
            if i != j:
                row = [0] * (m * m)
                row[idx(i, j)] += 1
                row[idx(j, j)] -= 1
                key = tuple(row)
                ineq[key] = ineq.get(key, False) or tiebreak.beats(i, j)
    eq = set()
    for a, b, c, d in itertools.product(range(m), repeat=4):
        if distinct_only and len({a, b, c, d}) < 4:
            continue
        row = [0] * (m * m)
        row[idx(c, a)] += 1
        row[idx(c, b)] -= 1
        row[idx(d, a)] -= 1
        row[idx(d, b)] += 1
        if any(row):
            neg = tuple(-v for v in row)
            if neg not in eq:
                eq.add(tuple(row))
    rows = sorted(ineq)
    eq_rows = [tuple(r) for r in sorted(eq)]
    keep = independent_rows(eq_rows)
    return ClosureSystem(m, tuple(rows), tuple(ineq[r] for r in rows), tuple(eq_rows[i] for i in keep))


def _flat(M) -> np.ndarray:
    if isinstance(M, ScoreMatrix):
        return np.array([float(v) for v in M.flat()])
    arr = np.asarray(M, dtype=float)
    return arr.reshape(-1)


def _matrix(x, m) -> ScoreMatrix:
    return ScoreMatrix(tuple(tuple(x[i * m + j] for j in range(m)) for i in range(m)))


def frobenius(A, B) -> float:
    return float(np.linalg.norm(_flat(A) - _flat(B)))


# -- alternating projections -----------------------------------------------


@dataclass(frozen=True)
class DykstraRun:
    point: np.ndarray
    sweeps: int
    residual: float


def dykstra(x0, system: ClosureSystem, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS) -> DykstraRun:
    """Dykstra's cyclic projections onto the half-spaces and the equality subspace.

    Stops when one sweep moves the iterate by less than ``tol`` (max norm)
    and no row is violated by more than ``tol``.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    x = np.array(x0, dtype=float)
    A = system.A()
    norms = np.einsum("ij,ij->i", A, A)
    P = None
    if system.equalities:
        E = system.E()
        P = np.eye(system.d) - np.linalg.pinv(E) @ E  # projector onto the null space
    y = np.zeros_like(A)
    y_eq = np.zeros(system.d)
    residual = system.residual(x)
    for sweep in range(1, max_sweeps + 1):
        prev = x.copy()
        for r in range(A.shape[0]):
            z = x + y[r]
            excess = float(A[r] @ z)
            x = z - (excess / norms[r]) * A[r] if excess > 0 else z
            y[r] = z - x
        if P is not None:
            z = x + y_eq
            x = P @ z
            y_eq = z - x
        moved = float(np.max(np.abs(x - prev))) if x.size else 0.0
        if moved < tol:
            residual = system.residual(x)
            if residual <= tol:
                return DykstraRun(x, sweeps=sweep, residual=residual)
    residual = system.residual(x)
    raise NumericError(f"alternating projections did not converge in {max_sweeps} sweeps", residual=residual)


def project_onto_closure(M: ScoreMatrix, tiebreak: TieBreak, tol: float = DEFAULT_TOL,
                         distinct_only: bool = True, max_sweeps: int = MAX_SWEEPS) -> ScoreMatrix:
    """Frobenius-nearest matrix of the closed region, as the exact binary value of the float iterate."""
    system = closure_system(M.m, tiebreak, distinct_only)
    run = dykstra(_flat(M), system, tol, max_sweeps)
    return _matrix([Fraction(float(v)) for v in run.point], M.m)


# -- rationalisation -------------------------------------------------------


def _dot(a, x):
    return sum((ai * xi for ai, xi in zip(a, x) if ai), Fraction(0))


def _exact_equality_projection(x, rows):
    """Project a rational vector onto ``{y : r.y = 0 for r in rows}``; returns (y, multipliers)."""
    if not rows:
        return list(x), []
    keep = independent_rows(rows)
    R = [rows[i] for i in keep]
    G = [[_dot(a, b) for b in R] for a in R]
    rhs = [_dot(a, x) for a in R]
    lam = solve_exact(G, rhs)
    y = list(x)
    for a, l in zip(R, lam):
        if l:
            y = [yi - l * ai for yi, ai in zip(y, a)]
    return y, list(zip(keep, lam))


def _exactly_in_closure(y, system: ClosureSystem) -> bool:
    return all(_dot(a, y) <= 0 for a in system.inequalities) and all(_dot(e, y) == 0 for e in system.equalities)


def polish(M: ScoreMatrix, x, system: ClosureSystem, active_tol: float = 1e-7) -> Optional[list]:
    """Exact projection guessed from the active set of a float solution.

    Projects ``M`` exactly onto the subspace of the near-active inequalities
    and the equalities; the answer is accepted only if it lies in the closed
    region and its inequality multipliers are non-negative, which makes it
    the exact projection.
    """
    A = system.A()
    scale = np.sqrt(np.einsum("ij,ij->i", A, A)) if A.size else np.zeros(0)
    act = [r for r in range(len(system.inequalities)) if float(A[r] @ x) >= -active_tol * scale[r]]
    rows = [system.inequalities[r] for r in act] + list(system.equalities)
    y, mult = _exact_equality_projection(list(M.flat()), rows)
    if not _exactly_in_closure(y, system):
        return None
    n_ineq = len(act)
    # y = M - sum(lam * row): inequality multipliers must be >= 0
    if any(l < 0 for i, l in mult if i < n_ineq):
        return None
    return y


def rationalize(x, cap: int = DENOMINATOR_CAP) -> list:
    return [Fraction(float(v)).limit_denominator(cap) for v in x]


def _strictly_feasible(y, m, tiebreak, distinct_only) -> bool:
    return not check_delta_plus(ScoreFunction(_matrix(y, m), tiebreak), distinct_only)


# -- sphere cover ----------------------------------------------------------


def cover_size_bound(d: int, eps: float) -> int:
    """Upper bound on the number of cover points in dimension ``d``."""
    K = math.floor(1 / eps)
    return (2 * K + 1) ** (d - 1) * 2


def _grid_chunks(d: int, eps: float):
    """Unit vectors of the cover: ``k * eps`` in the first ``d - 1`` coordinates, closing last one.

    Yields float arrays of shape ``(n, d)``; both signs of the last
    coordinate are produced, once when it is zero.
    """
    K = math.floor(1 / eps)
    ks = np.arange(-K, K + 1, dtype=float) * eps
    free = d - 1
    if free == 0:
        yield np.array([[1.0], [-1.0]])
        return
    inner = 1
    while inner < free and (2 * K + 1) ** (inner + 1) <= _CHUNK:
        inner += 1
    outer = free - inner
    mesh = np.stack(np.meshgrid(*([ks] * inner), indexing="ij"), axis=-1).reshape(-1, inner)
    mesh_sq = np.einsum("ij,ij->i", mesh, mesh)
    for head in itertools.product(ks, repeat=outer):
        head = np.array(head, dtype=float)
        s = float(head @ head) + mesh_sq
        ok = s <= 1.0 + 1e-12
        if not ok.any():
            continue
        body = mesh[ok]
        last = np.sqrt(np.clip(1.0 - s[ok], 0.0, None))
        pts = np.empty((body.shape[0], d))
        pts[:, :outer] = head
        pts[:, outer:free] = body
        pts[:, free] = last
        neg = pts[last > 0].copy()
        neg[:, free] *= -1
        yield np.vstack([pts, neg])


def cover_points(d: int, eps: float, max_points: int = MAX_COVER_POINTS) -> np.ndarray:
    """All cover points of the unit sphere in dimension ``d`` (small cases only)."""
    if cover_size_bound(d, eps) > max_points:
        raise ResourceLimitError(
            f"cover of dimension {d} at eps={eps} exceeds {max_points} points; use a larger eps", explored=0
        )
    chunks = list(_grid_chunks(d, eps))
    return np.vstack(chunks) if chunks else np.zeros((0, d))


def nearest_cover_point(u, eps: float, radius: int = 1) -> np.ndarray:
    """Nearest cover point to the unit vector ``u`` among grid neighbours of its rounding.

    Only points whose first ``d - 1`` coordinates are within ``radius`` grid
    steps of ``floor(u / eps)`` or ``ceil(u / eps)`` are considered, so the
    returned distance is an upper bound on the true nearest distance.
    """
    u = np.asarray(u, dtype=float)
    d = u.size
    K = math.floor(1 / eps)
    if d == 1:
        return np.array([1.0 if u[0] >= 0 else -1.0])
    lo = np.floor(u[:-1] / eps).astype(int)
    offsets = np.arange(-radius, radius + 2)
    cand = np.stack(np.meshgrid(*[lo_i + offsets for lo_i in lo], indexing="ij"), axis=-1).reshape(-1, d - 1)
    cand = cand[np.all(np.abs(cand) <= K, axis=1)]
    head = cand * eps
    s = np.einsum("ij,ij->i", head, head)
    ok = s <= 1.0 + 1e-12
    head, s = head[ok], s[ok]
    last = np.sqrt(np.clip(1.0 - s, 0.0, None)) * (1.0 if u[-1] >= 0 else -1.0)
    pts = np.column_stack([head, last])
    best = int(np.argmin(np.linalg.norm(pts - u, axis=1)))
    return pts[best]


def _snap_float(P_E, pts):
    return pts if P_E is None else pts @ P_E.T


def sphere_repair(center: ScoreMatrix, original: ScoreMatrix, delta: float, eps: float,
                  tiebreak: TieBreak, distinct_only: bool = True,
                  max_points: int = MAX_COVER_POINTS) -> Optional[ScoreMatrix]:
    """Nearest strictly feasible cover point of the radius-``delta`` sphere around ``center``.

    Cover points are screened in floating point, the best candidates are
    rounded to rationals (and, if the region has equalities, projected
    exactly onto them), and the first one passing the exact check is
    returned. ``None`` if no cover point qualifies.
    """
    if not (delta > 0 and eps > 0):
        raise PreconditionError("delta and eps must be positive")
    m = center.m
    d = m * m
    bound = cover_size_bound(d, eps)
    if bound > max_points:
        raise ResourceLimitError(
            f"sphere cover needs up to {bound} points (> {max_points}); use a larger eps", explored=0
        )
    system = closure_system(m, tiebreak, distinct_only)
    c = _flat(center)
    o = _flat(original)
    A = system.A()
    strict = np.array(system.strict, dtype=bool)
    P_E = None
    if system.equalities:
        E = system.E()
        P_E = np.eye(d) - np.linalg.pinv(E) @ E
    best_d = np.zeros(0)
    best_p = np.zeros((0, d))
    for chunk in _grid_chunks(d, eps):
        pts = _snap_float(P_E, c + delta * chunk)
        vals = pts @ A.T if A.size else np.zeros((pts.shape[0], 0))
        ok = np.all(np.where(strict, vals < 0, vals <= 1e-12), axis=1)
        if not ok.any():
            continue
        pts = pts[ok]
        dist = np.linalg.norm(pts - o, axis=1)
        best_d = np.concatenate([best_d, dist])
        best_p = np.vstack([best_p, pts])
        if best_d.size > _KEEP:
            keep = np.argpartition(best_d, _KEEP)[:_KEEP]
            best_d, best_p = best_d[keep], best_p[keep]
    eq_rows = list(system.equalities)
    for r in np.argsort(best_d, kind="stable"):
        y = rationalize(best_p[r])
        if eq_rows:
            y, _ = _exact_equality_projection(y, eq_rows)
        if _strictly_feasible(y, m, tiebreak, distinct_only):
            return _matrix(y, m)
    return None


# -- pipeline --------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionStatus:
    kind: str
    delta: Optional[float] = None
    eps: Optional[float] = None

    def to_json(self):
        out = {"kind": self.kind}
        if self.delta is not None:
            out["delta"] = self.delta
            out["eps"] = self.eps
        return out


@dataclass(frozen=True)
class ProjectionResult:
    matrix: ScoreMatrix
    distance: float
    status: ProjectionStatus
    closure_matrix: ScoreMatrix  # rationalised projection on the closed region
    closure_distance: float
    sweeps: int
    total_checked: bool = False
    notes: tuple = field(default=())


def closest_strategyproof(M: ScoreMatrix, tiebreak: Optional[TieBreak] = None, delta: float = DEFAULT_DELTA,
                          eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL, distinct_only: bool = True,
                          max_sweeps: int = MAX_SWEEPS, max_points: int = MAX_COVER_POINTS,
                          check_total: bool = True) -> ProjectionResult:
    """Project, verify strictness exactly, repair on a sphere if needed, then verify totality.

    The tie-break is kept fixed throughout.
    """
    if not (delta > 0 and eps > 0 and tol > 0):
        raise PreconditionError("delta, eps and tol must be positive")
    tiebreak = TieBreak.natural(M.m) if tiebreak is None else tiebreak
    m = M.m
    system = closure_system(m, tiebreak, distinct_only)
    run = dykstra(_flat(M), system, tol, max_sweeps)
    notes = []
    y = polish(M, run.point, system)
    if y is None:
        y = rationalize(run.point)
        notes.append("active-set polish failed; rounded the float projection")
    closure = _matrix(y, m)
    closure_dist = frobenius(M, closure)
    if _strictly_feasible(y, m, tiebreak, distinct_only):
        result, status = closure, ProjectionStatus(EXACT_PROJECTION)
    else:
        repaired = sphere_repair(closure, M, delta, eps, tiebreak, distinct_only, max_points)
        if repaired is None:
            return ProjectionResult(closure, closure_dist, ProjectionStatus(NO_STRICT_POINT, delta, eps),
                                    closure, closure_dist, run.sweeps, False, tuple(notes))
        result, status = repaired, ProjectionStatus(SPHERE_REPAIRED, delta, eps)
    checked = False
    if check_total and m <= TOTAL_MAX_OBJECTS:
        checked = True
        if not is_total(ScoreFunction(result, tiebreak), stop_early=True).total:
            status = ProjectionStatus(NOT_TOTAL, status.delta, status.eps)
    elif check_total:
        notes.append(f"totality not checked for m={m} > {TOTAL_MAX_OBJECTS}")
    return ProjectionResult(result, frobenius(M, result), status, closure, closure_dist, run.sweeps,
                            checked, tuple(notes))


def result_to_dict(res: ProjectionResult) -> dict:
    def mat(A):
        return [[fraction_to_json(v) for v in row] for row in A.entries]

    return {
        "matrix": mat(res.matrix),
        "distance": res.distance,
        "status": res.status.to_json(),
        "closure_matrix": mat(res.closure_matrix),
        "closure_distance": res.closure_distance,
        "sweeps": res.sweeps,
        "total_checked": res.total_checked,
        "notes": list(res.notes),
    }
