"""Structural checks on score functions.

Every checker returns an explicit witness or violation so that verdicts can
be replayed: neutrality, the neutral decomposition, totality (one exact LP
per target winning set), the linear constraint families ``delta`` and
``delta_plus``, a bounded exhaustive CCP search, and first-class sets of an
election.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ResourceLimitError
from .model import ElectionInstance, fraction_to_json, sincere_utility
from .numeric import LinearSystem, lp_max_margin, scale_to_integer
from .score import ScoreFunction, ScoreMatrix, winners
from .welfare import feasible_subsets

DELTA_MAIN = "DeltaMain"
DELTA_DIAG = "DeltaDiag"
DELTA_PLUS_EQ = "DeltaPlusEq"
NEUTRAL_EQ = "NeutralEq"
NEUTRAL_STRICT = "NeutralStrict"

NEUTRAL_MAX_OBJECTS = 12
TOTAL_MAX_OBJECTS = 10
CCP_MAX_EXPLORED = 5_000_000


@dataclass(frozen=True)
class ConstraintViolation:
    kind: str
    indices: tuple
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class NeutralityReport:
    neutral: bool
    violation: Optional[ConstraintViolation] = None

    def __bool__(self):
        return self.neutral


@dataclass
class TotalityReport:
    total: bool
    # (W, frozenset target) -> integer witness tally, or None when unreachable
    per_target: dict = field(default_factory=dict)

    def __bool__(self):
        return self.total

    def infeasible_targets(self) -> list:
        return [k for k, v in self.per_target.items() if v is None]


@dataclass(frozen=True)
class CcpCounterexample:
    tally: tuple
    W: int
    alpha: int
    beta: int
    before: frozenset
    after: frozenset


@dataclass(frozen=True)
class CcpReport:
    holds_on_bounds: bool
    counterexample: Optional[CcpCounterexample] = None
    explored: int = 0

    def __bool__(self):
        return self.holds_on_bounds


def _as_matrix(sf) -> ScoreMatrix:
    return sf.matrix if isinstance(sf, ScoreFunction) else sf


def _check_size(m, bound, what):
    if m > bound:
        raise ResourceLimitError(f"{what} is exponential in m; {m} exceeds the bound {bound}", explored=0)


# -- neutrality ------------------------------------------------------------


def is_neutral(sf: ScoreFunction, max_objects: int = NEUTRAL_MAX_OBJECTS) -> NeutralityReport:
    """Check equal scores on every voted subset and strict dominance off it.

    Subsets are visited by increasing size, then lexicographically; the first
    violation found is reported.
    """
    M = _as_matrix(sf)
    m = M.m
    _check_size(m, max_objects, "the neutrality check")
    for k in range(1, m + 1):
        for subset in itertools.combinations(range(m), k):
            vec = [sum((M[i, j] for j in subset), Fraction(0)) for i in range(m)]
            top = vec[subset[0]]
            for i in subset[1:]:
                if vec[i] != top:
                    return NeutralityReport(False, ConstraintViolation(NEUTRAL_EQ, subset, top, vec[i]))
            inside = set(subset)
            for j in range(m):
                if j not in inside and not vec[j] < top:
                    return NeutralityReport(
                        False, ConstraintViolation(NEUTRAL_STRICT, subset + (j,), vec[j], top)
                    )
    return NeutralityReport(True)


def neutral_decomposition(M) -> Optional[tuple]:
    """Write ``M = c*I + sum_j lam_j * A_j`` (``A_j`` = all-ones column ``j``), ``c > 0``.

    Returns ``(c, lam)`` or ``None`` when no such decomposition exists.
    """
    M = _as_matrix(M)
    m = M.m
    if m == 1:
        x = M[0, 0]
        return (x, (Fraction(0),)) if x > 0 else (Fraction(1), (x - 1,))
    lam = []
    c = None
    for j in range(m):
        off = {M[k, j] for k in range(m) if k != j}
        if len(off) != 1:
            return None
        lj = off.pop()
        cj = M[j, j] - lj
        if c is None:
            c = cj
        elif cj != c:
            return None
        lam.append(lj)
    if c <= 0:
        return None
    return c, tuple(lam)


def neutral_matrix(c, lam) -> ScoreMatrix:
    m = len(lam)
    return ScoreMatrix(tuple(tuple(lam[j] + (c if i == j else 0) for j in range(m)) for i in range(m)))


# -- totality --------------------------------------------------------------


def target_system(sf: ScoreFunction, target) -> LinearSystem:
    """Linear system whose strictly feasible points are tallies electing ``target``."""
    M = sf.matrix
    m = M.m
    sys = LinearSystem(m)
    inside = sorted(target)
    outside = [j for j in range(m) if j not in target]
    for i in inside:
        for j in outside:
            row = [M[i, q] - M[j, q] for q in range(m)]
            if sf.tiebreak.beats(i, j):
                sys.add_weak(row)
            else:
                sys.add_strict(row)
    return sys


def target_witness(sf: ScoreFunction, target) -> Optional[tuple]:
    """A non-zero integer tally electing ``target`` with ``W = len(target)``, or None."""
    sys = target_system(sf, target)
    res = lp_max_margin(sys)
    if res is None:
        return None
    point, margin = res
    if sys.strict_rows and margin <= 0:
        return None
    witness = tuple(scale_to_integer(point))
    assert winners(sf, witness, len(target)).winners == frozenset(target)
    return witness


def is_total(sf: ScoreFunction, max_objects: int = TOTAL_MAX_OBJECTS, stop_early: bool = False) -> TotalityReport:
    """Decide, for every ``W`` in ``[0, m]`` and every ``W``-subset, whether some
    non-empty tally elects it."""
    m = sf.m
    _check_size(m, max_objects, "the totality sweep")
    report = TotalityReport(True)
    for W in range(m + 1):
        for target in itertools.combinations(range(m), W):
            t = frozenset(target)
            w = target_witness(sf, t)
            report.per_target[(W, t)] = w
            if w is None:
                report.total = False
                if stop_early:
                    return report
    return report


# -- delta and delta_plus --------------------------------------------------


def check_delta(sf: ScoreFunction) -> list:
    """Violations of the triple inequalities and the tie-break-aware diagonal bounds."""
    M = sf.matrix
    m = M.m
    out = []
    for i in range(m):
        for j in range(m):
            lhs = M[i, i] - M[i, j]
            for k in range(m):
                rhs = M[k, i] - M[k, j]
                if lhs < rhs:
                    out.append(ConstraintViolation(DELTA_MAIN, (i, j, k), lhs, rhs))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            ok = M[i, j] < M[j, j] if sf.tiebreak.beats(i, j) else M[i, j] <= M[j, j]
            if not ok:
                out.append(ConstraintViolation(DELTA_DIAG, (i, j), M[i, j], M[j, j]))
    return out


def check_delta_plus(sf: ScoreFunction, distinct_only: bool = False) -> list:
    """``check_delta`` plus the column-difference equalities.

    With ``distinct_only`` the equalities are only required over pairwise
    distinct ``a, b, c, d``.
    """
    M = sf.matrix
    m = M.m
    out = check_delta(sf)
    for a, b, c, d in itertools.product(range(m), repeat=4):
        if distinct_only and len({a, b, c, d}) < 4:
            continue
        lhs = M[c, a] - M[c, b]
        rhs = M[d, a] - M[d, b]
        if lhs != rhs:
            out.append(ConstraintViolation(DELTA_PLUS_EQ, (a, b, c, d), lhs, rhs))
    return out


# -- constrained change property -------------------------------------------


def ccp_allows(before: frozenset, after: frozenset, alpha: int, beta: int) -> bool:
    """Whether a switch from ``alpha`` to ``beta`` may turn ``before`` into ``after``."""
    if before == after:
        return True
    left = before - after
    entered = after - before
    if len(left) != 1 or len(entered) != 1:
        return False
    (out_obj,), (in_obj,) = tuple(left), tuple(entered)
    return out_obj == alpha or in_obj == beta


def _integer_matrix(M: ScoreMatrix):
    lcm = 1
    for v in M.flat():
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return [[int(v * lcm) for v in row] for row in M.entries]


def _ccp_scan(sf: ScoreFunction, tallies, W_values, max_explored):
    """Scan ``tallies`` in order; return (first counterexample or None, explored)."""
    M = _integer_matrix(sf.matrix)
    m = sf.m
    rank = [sf.tiebreak.rank(o) for o in range(m)]
    cols = [[M[i][j] for i in range(m)] for j in range(m)]
    explored = 0
    for e in tallies:
        s = [sum(M[i][q] * e[q] for q in range(m)) for i in range(m)]
        order = sorted(range(m), key=lambda o: (-s[o], rank[o]))
        for alpha in range(m):
            if e[alpha] < 1:
                continue
            for beta in range(m):
                if beta == alpha:
                    continue
                s2 = [s[i] - cols[alpha][i] + cols[beta][i] for i in range(m)]
                order2 = sorted(range(m), key=lambda o: (-s2[o], rank[o]))
                for W in W_values:
                    explored += 1
                    before = frozenset(order[:W])
                    after = frozenset(order2[:W])
                    if not ccp_allows(before, after, alpha, beta):
                        return CcpCounterexample(tuple(e), W, alpha, beta, before, after), explored
                if explored > max_explored:
                    raise ResourceLimitError("CCP search exceeded its budget", explored=explored)
    return None, explored


def _ccp_chunk(args):
    sf, first, max_tally, W_values, max_explored = args
    m = sf.m
    tallies = ((first,) + rest for rest in itertools.product(range(max_tally + 1), repeat=m - 1))
    return _ccp_scan(sf, tallies, W_values, max_explored)


def check_ccp(
    sf: ScoreFunction,
    max_tally: int = 5,
    W_values=None,
    jobs: int = 1,
    max_explored: int = CCP_MAX_EXPLORED,
) -> CcpReport:
    """Exhaustive CCP search over tallies with entries in ``[0, max_tally]``.

    Visits tallies lexicographically, then ``alpha``, ``beta`` and ``W``; the
    first transition outside the three allowed changes is returned. The
    verdict only covers the explored bounds.
    """
    m = sf.m
    W_values = tuple(range(m + 1)) if W_values is None else tuple(W_values)
    budget = (max_tally + 1) ** m * m * max(m - 1, 1) * max(len(W_values), 1)
    if budget > max_explored:
        raise ResourceLimitError(f"CCP bounds need {budget} checks (> {max_explored})", explored=0)
    chunks = [(sf, first, max_tally, W_values, max_explored) for first in range(max_tally + 1)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_ccp_chunk, chunks))
    else:
        results = []
        for ch in chunks:
            results.append(_ccp_chunk(ch))
            if results[-1][0] is not None:
                break
    explored = 0
    for cex, n in results:
        explored += n
        if cex is not None:
            return CcpReport(False, cex, explored)
    return CcpReport(True, None, explored)


# -- first-class sets ------------------------------------------------------


def is_first_class(subset, inst: ElectionInstance, max_objects: int = 20) -> bool:
    """Sorted-dominance test against every feasible set.

    A permutation with ``u_sigma(v)(s) >= u_v(s*)`` for all voters exists iff the
    sorted utility vector of ``s`` dominates that of ``s*`` componentwise.
    """
    _check_size(inst.m, max_objects, "the first-class test")
    s = tuple(subset)
    if not inst.is_feasible(s):
        return False
    mine = sorted(sincere_utility(b, s) for b in inst.profile)
    for other in feasible_subsets(inst):
        theirs = sorted(sincere_utility(b, other) for b in inst.profile)
        if any(a < b for a, b in zip(mine, theirs)):
            return False
    return True


def first_class_sets(inst: ElectionInstance, max_objects: int = 20) -> list:
    return [frozenset(s) for s in feasible_subsets(inst) if is_first_class(s, inst, max_objects)]


# -- certificate -----------------------------------------------------------


def violation_to_dict(v: ConstraintViolation) -> dict:
    return {"kind": v.kind, "indices": list(v.indices), "lhs": fraction_to_json(v.lhs), "rhs": fraction_to_json(v.rhs)}


def certify(sf: ScoreFunction, checks=("neutral", "total", "delta", "delta_plus", "ccp"),
            names=None, distinct_only=False, max_tally=5, jobs=1) -> tuple:
    """Run the requested checks; return ``(certificate dict, all_passed)``."""
    names = names or [f"o{i + 1}" for i in range(sf.m)]
    cert = {}
    passed = True
    if "neutral" in checks:
        r = is_neutral(sf)
        cert["neutral"] = {"holds": r.neutral, "violation": violation_to_dict(r.violation) if r.violation else None}
        passed &= r.neutral
    if "total" in checks:
        r = is_total(sf)
        cert["total"] = {
            "holds": r.total,
            "targets": [
                {"W": W, "target": [names[o] for o in sorted(t)], "witness": list(w) if w is not None else None}
                for (W, t), w in r.per_target.items()
            ],
        }
        passed &= r.total
    if "delta" in checks:
        vs = check_delta(sf)
        cert["delta"] = [violation_to_dict(v) for v in vs]
        passed &= not vs
    if "delta_plus" in checks:
        vs = check_delta_plus(sf, distinct_only=distinct_only)
        cert["delta_plus"] = [violation_to_dict(v) for v in vs]
        cert["delta_plus_distinct_only"] = distinct_only
        passed &= not vs
    if "ccp" in checks:
        r = check_ccp(sf, max_tally=max_tally, jobs=jobs)
        cex = r.counterexample
        cert["ccp"] = {
            "holds_on_bounds": r.holds_on_bounds,
            "max_tally": max_tally,
            "explored": r.explored,
            "counterexample": None if cex is None else {
                "tally": list(cex.tally), "W": cex.W,
                "alpha": names[cex.alpha], "beta": names[cex.beta],
                "before": [names[o] for o in sorted(cex.before)],
                "after": [names[o] for o in sorted(cex.after)],
            },
        }
        passed &= r.holds_on_bounds
    return cert, bool(passed)
