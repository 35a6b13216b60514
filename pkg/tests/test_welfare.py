import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from scorevoting.errors import BallotKindError, PreconditionError, ResourceLimitError
from scorevoting.instances import fair_weighted_manipulation
from scorevoting.model import Ballot, ElectionInstance, Profile
from scorevoting.welfare import (
    FAIR,
    UTILITARIAN,
    feasible_subsets,
    objective_value,
    solve,
    solve_brute_force,
    solve_fair_exact,
    solve_utilitarian_dp,
    solve_utilitarian_unitary,
    solve_value_knapsack_exact,
    utilitarian_value,
)


def _names(m):
    return tuple(f"p{i}" for i in range(m))


@st.composite
def approval_elections(draw, max_m=7, max_n=5, unit=False, max_weight=10):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    weights = [1] * m if unit else draw(st.lists(st.integers(1, max_weight), min_size=m, max_size=m))
    budget = draw(st.integers(0, sum(weights)))
    ballots = [Ballot.approval(draw(st.sets(st.integers(0, m - 1))), m) for _ in range(n)]
    return ElectionInstance(_names(m), weights, budget, Profile(tuple(ballots)))


def _best_value(inst, objective):
    return max(objective_value(inst, c, objective) for c in feasible_subsets(inst))


def test_weighted_fair_instance_outcomes():
    fx = fair_weighted_manipulation()
    inst = fx.election
    sincere = solve_fair_exact(inst)
    assert inst.names(sincere.winning_set) == ["a", "e", "g"]
    assert (sincere.objective_value, sincere.secondary_value) == (1, 12)
    dev = inst.with_profile(inst.profile.replace(fx.deviation.voter, fx.deviation.ballot))
    after = solve_fair_exact(dev)
    assert inst.names(after.winning_set) == ["a", "b", "c", "d", "e", "f"]


def test_weighted_fair_instance_utilitarian_optimum():
    # brute force over every feasible subset fixes the optimum at 12
    inst = fair_weighted_manipulation().election
    brute = solve_brute_force(inst, UTILITARIAN)
    assert brute.objective_value == 12
    assert inst.names(brute.winning_set) == ["a", "e", "g"]
    dp = solve_utilitarian_dp(inst, check_invariant=True)
    assert dp.objective_value == 12
    assert solve(inst).objective_value == 12


@given(approval_elections(unit=True))
def test_greedy_matches_brute_force_on_unit_weights(inst):
    assert solve_utilitarian_unitary(inst).objective_value == _best_value(inst, UTILITARIAN)


@given(approval_elections(max_m=6))
def test_dp_matches_brute_force_and_keeps_its_invariant(inst):
    res = solve_utilitarian_dp(inst, check_invariant=True)
    assert inst.is_feasible(res.winning_set)
    assert res.objective_value == utilitarian_value(inst, res.winning_set)
    assert res.objective_value == _best_value(inst, UTILITARIAN)


@given(approval_elections(max_m=6))
def test_fair_exact_matches_brute_force(inst):
    res = solve_fair_exact(inst)
    assert inst.is_feasible(res.winning_set)
    assert res.objective_value == _best_value(inst, FAIR)


@st.composite
def value_elections(draw):
    m = draw(st.integers(1, 6))
    n = draw(st.integers(1, 3))
    weights = draw(st.lists(st.fractions(min_value=Fraction(1, 2), max_value=6, max_denominator=3), min_size=m, max_size=m))
    budget = draw(st.fractions(min_value=0, max_value=10, max_denominator=2))
    ballots = [Ballot.value(draw(st.lists(st.fractions(min_value=-3, max_value=5, max_denominator=4),
                                         min_size=m, max_size=m))) for _ in range(n)]
    return ElectionInstance(_names(m), weights, budget, Profile(tuple(ballots)))


@given(value_elections())
def test_branch_and_bound_matches_brute_force(inst):
    res = solve_value_knapsack_exact(inst)
    assert inst.is_feasible(res.winning_set)
    assert res.objective_value == _best_value(inst, UTILITARIAN)
    assert solve(inst).objective_value == res.objective_value


def test_ranking_ballots_through_the_dp():
    inst = ElectionInstance(("x", "y", "z"), (1, 2, 1), 2,
                            Profile((Ballot.ranking((3, 2, 1)), Ballot.ranking((1, 3, 2)))))
    res = solve_utilitarian_dp(inst)
    assert res.objective_value == 7  # x and z: 3 + 1 + 1 + 2
    assert inst.names(res.winning_set) == ["x", "z"]


def test_solver_preconditions():
    inst = ElectionInstance(("a", "b"), (1, 2), 2, Profile((Ballot.approval([0], 2),)))
    with pytest.raises(PreconditionError):
        solve_utilitarian_unitary(inst)
    fractional = ElectionInstance(("a",), (Fraction(1, 2),), 1, Profile((Ballot.approval([0], 1),)))
    with pytest.raises(PreconditionError):
        solve_utilitarian_dp(fractional)
    vals = ElectionInstance(("a",), (1,), 1, Profile((Ballot.value((1,)),)))
    with pytest.raises(BallotKindError):
        solve_utilitarian_dp(vals)
    with pytest.raises(PreconditionError):
        solve(inst, "median")
    big = ElectionInstance(_names(21), (1,) * 21, 3, Profile(()))
    with pytest.raises(ResourceLimitError):
        solve_fair_exact(big)


def test_empty_profile_and_zero_budget():
    inst = ElectionInstance(("a", "b"), (1, 1), 0, Profile((Ballot.approval([0, 1], 2),)))
    assert solve(inst).winning_set == frozenset()
    assert solve_fair_exact(inst).winning_set == frozenset()


def test_feasible_subsets_order():
    inst = ElectionInstance(("a", "b", "c"), (1, 1, 2), 2, Profile(()))
    assert list(feasible_subsets(inst)) == [(), (0,), (1,), (2,), (0, 1)]


def test_fair_ties_break_on_sum_then_lexicographic():
    # both {a} and {b} give min 0; {b} has the larger sum
    inst = ElectionInstance(("a", "b"), (1, 1), 1,
                            Profile((Ballot.approval([1], 2), Ballot.approval([1], 2), Ballot.approval([0], 2))))
    assert solve_fair_exact(inst).winning_set == {1}
    tie = ElectionInstance(("a", "b"), (1, 1), 1, Profile((Ballot.approval([0], 2), Ballot.approval([1], 2))))
    assert solve_fair_exact(tie).winning_set == {0}
    assert list(itertools.islice(feasible_subsets(tie), 2)) == [(), (0,)]
