"""Exact welfare solvers for utilitarian and fair (max-min) objectives.

Utilitarian with unitary weights is a greedy top-W pick; with integer
weights and integer ballot values it is the value-indexed knapsack dynamic
program; for arbitrary value ballots it is an exact branch and bound. The
fair objective is NP-hard in every ballot class, so it is solved by
exhaustive search at desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BallotKindError, PreconditionError, ResourceLimitError
from .model import APPROVAL, RANKING, VALUE, ElectionInstance, sincere_utility

UTILITARIAN = "utilitarian"
FAIR = "fair"

DEFAULT_MAX_OBJECTS = 20


@dataclass(frozen=True)
class SolverResult:
    winning_set: frozenset
    objective_value: Fraction
    secondary_value: Fraction  # utilitarian sum, used to break fair ties


def aggregate_values(inst: ElectionInstance) -> list:
    """Per-object total of the declared values."""
    vals = [Fraction(0)] * inst.m
    for b in inst.profile:
        for o, v in enumerate(b.values):
            vals[o] += v
    return vals


def utilitarian_value(inst: ElectionInstance, subset) -> Fraction:
    return sum((sincere_utility(b, subset) for b in inst.profile), Fraction(0))


def fair_value(inst: ElectionInstance, subset) -> Fraction:
    if inst.n == 0:
        return Fraction(0)
    return min(sincere_utility(b, subset) for b in inst.profile)


def objective_value(inst: ElectionInstance, subset, objective: str) -> Fraction:
    if objective == UTILITARIAN:
        return utilitarian_value(inst, subset)
    if objective == FAIR:
        return fair_value(inst, subset)
    raise PreconditionError(f"unknown objective {objective!r}")


def _result(inst, subset, objective):
    s = frozenset(subset)
    return SolverResult(s, objective_value(inst, s, objective), utilitarian_value(inst, s))


def solve_utilitarian_unitary(inst: ElectionInstance) -> SolverResult:
    """Greedy pick of the floor(W) objects with the largest total value.

    Ties go to the smaller index; objects with a negative total are never
    taken because leaving them out is strictly better.
    """
    if not inst.is_unitary:
        raise PreconditionError("greedy solver requires unitary weights")
    k = min(int(inst.budget), inst.m)  # floor for non-negative W
    vals = aggregate_values(inst)
    order = sorted(range(inst.m), key=lambda o: (-vals[o], o))
    chosen = [o for o in order[:k] if vals[o] >= 0]
    return _result(inst, chosen, UTILITARIAN)


def _integer(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise PreconditionError(f"{what} must be integers for the dynamic program, got {x}")
    return int(x)


def solve_utilitarian_dp(inst: ElectionInstance, check_invariant: bool = False) -> SolverResult:
    """Value-indexed 0/1 knapsack over the aggregated ballot values.

    ``dynamic_weight[l]`` is the least total weight of a subset of the objects
    processed so far whose aggregate value is exactly ``l``; unreachable
    entries hold ``weight_max * m + 1``. The answer is the highest reachable
    value whose weight fits the budget.
    """
    if inst.profile.kind not in (APPROVAL, RANKING, None):
        raise BallotKindError("the dynamic program takes approval or ranking ballots")
    m = inst.m
    values = [_integer(v, "ballot values") for v in aggregate_values(inst)]
    weights = [_integer(w, "weights") for w in inst.weights]
    if any(v < 0 for v in values):
        raise PreconditionError("the dynamic program needs non-negative values")
    budget = inst.budget
    mu = max(values)
    weight_max = max(weights)
    unreachable = weight_max * m + 1
    size = mu * m + 1
    dynamic_weight = [0] + [unreachable] * (size - 1)
    dynamic_outcome = [frozenset()] * size

    for i in range(m):
        for k in range(size - 1, 0, -1):
            j = k - values[i]
            if j < 0:
                break
            if dynamic_weight[j] == unreachable:
                continue
            cand = dynamic_weight[j] + weights[i]
            if cand < dynamic_weight[k] and cand <= budget:
                dynamic_weight[k] = cand
                dynamic_outcome[k] = dynamic_outcome[j] | {i}
        if check_invariant:
            _assert_dp_invariant(values[: i + 1], weights[: i + 1], budget, dynamic_weight, unreachable)

    best = max(k for k in range(size) if dynamic_weight[k] != unreachable)
    return _result(inst, dynamic_outcome[best], UTILITARIAN)


def _assert_dp_invariant(values, weights, budget, table, unreachable):
    least = {}
    for r in range(len(values) + 1):
        for combo in itertools.combinations(range(len(values)), r):
            w = sum(weights[o] for o in combo)
            if w <= budget:
                v = sum(values[o] for o in combo)
                least[v] = min(least.get(v, unreachable), w)
    for k, w in enumerate(table):
        assert w == least.get(k, unreachable), (k, w, least.get(k))


def _check_bound(m, max_objects):
    if m > max_objects:
        raise ResourceLimitError(f"{m} objects exceed the exhaustive-search bound {max_objects}", explored=0)


def feasible_subsets(inst: ElectionInstance):
    """Every budget-feasible subset, by increasing size then lexicographically."""
    for r in range(inst.m + 1):
        for combo in itertools.combinations(range(inst.m), r):
            if inst.is_feasible(combo):
                yield combo


def solve_fair_exact(inst: ElectionInstance, max_objects: int = DEFAULT_MAX_OBJECTS) -> SolverResult:
    """Maximise (minimum utility, utility sum), then the lexicographically smallest set."""
    _check_bound(inst.m, max_objects)
    vals = [b.values for b in inst.profile]
    best_key, best = None, ()
    for combo in feasible_subsets(inst):
        per_voter = [sum((v[o] for o in combo), Fraction(0)) for v in vals]
        key = (min(per_voter) if per_voter else Fraction(0), sum(per_voter, Fraction(0)))
        if best_key is None or key > best_key or (key == best_key and combo < best):
            best_key, best = key, combo
    return SolverResult(frozenset(best), best_key[0], best_key[1])


def solve_value_knapsack_exact(inst: ElectionInstance, max_objects: int = DEFAULT_MAX_OBJECTS) -> SolverResult:
    """Exact 0/1 knapsack on the aggregated values by depth-first branch and bound.

    The bound is the fractional (Dantzig) relaxation over the remaining items.
    """
    _check_bound(inst.m, max_objects)
    kind = inst.profile.kind
    if kind not in (VALUE, APPROVAL, RANKING, None):
        raise BallotKindError(f"unsupported ballot kind {kind!r}")
    vals = aggregate_values(inst)
    budget = inst.budget
    items = [o for o in range(inst.m) if vals[o] > 0 and inst.weights[o] <= budget]
    items.sort(key=lambda o: (-(vals[o] / inst.weights[o]), o))
    w = [inst.weights[o] for o in items]
    v = [vals[o] for o in items]
    n = len(items)

    def bound(i, cap, acc):
        for k in range(i, n):
            if w[k] <= cap:
                cap -= w[k]
                acc += v[k]
            else:
                return acc + v[k] * cap / w[k]
        return acc

    best_val = Fraction(0)
    best_set: tuple = ()
    stack = [(0, budget, Fraction(0), ())]
    while stack:
        i, cap, acc, chosen = stack.pop()
        if acc > best_val or (acc == best_val and sorted(chosen) < sorted(best_set)):
            best_val, best_set = acc, chosen
        if i == n or bound(i, cap, acc) < best_val:
            continue
        stack.append((i + 1, cap, acc, chosen))
        if w[i] <= cap:
            stack.append((i + 1, cap - w[i], acc + v[i], chosen + (items[i],)))
    return _result(inst, best_set, UTILITARIAN)


def solve_brute_force(inst: ElectionInstance, objective: str, max_objects: int = DEFAULT_MAX_OBJECTS) -> SolverResult:
    """Best feasible subset by exhaustive search; ties by utility sum, then lexicographic."""
    _check_bound(inst.m, max_objects)
    best_key, best = None, ()
    for combo in feasible_subsets(inst):
        key = (objective_value(inst, combo, objective), utilitarian_value(inst, combo))
        if best_key is None or key > best_key or (key == best_key and combo < best):
            best_key, best = key, combo
    return SolverResult(frozenset(best), best_key[0], best_key[1])


def solve(inst: ElectionInstance, objective: str = UTILITARIAN, max_objects: Optional[int] = None) -> SolverResult:
    """Dispatch to the cheapest exact solver for the instance."""
    max_objects = DEFAULT_MAX_OBJECTS if max_objects is None else max_objects
    if objective == FAIR:
        return solve_fair_exact(inst, max_objects)
    if objective != UTILITARIAN:
        raise PreconditionError(f"unknown objective {objective!r}")
    if inst.is_unitary and inst.budget.denominator == 1:
        return solve_utilitarian_unitary(inst)
    integral = all(w.denominator == 1 for w in inst.weights) and all(
        v.denominator == 1 and v >= 0 for b in inst.profile for v in b.values
    )
    if inst.profile.kind in (APPROVAL, RANKING, None) and integral and inst.n > 0:
        return solve_utilitarian_dp(inst)
    return solve_value_knapsack_exact(inst, max_objects)
