import dataclasses
import itertools
import random
from fractions import Fraction

import pytest

from scorevoting.errors import DomainError, ResourceLimitError
from scorevoting.instances import delta_not_strategyproof, fair_unitary_deviation, fair_weighted_manipulation
from scorevoting.model import Ballot, Profile
from scorevoting.oracle import (
    Mechanism,
    OracleBounds,
    find_deviation,
    find_manipulation,
    find_manipulation_all_W,
    find_tally_manipulation,
    fuzz_manipulation,
    verify_witness,
    witness_from_dict,
    witness_to_dict,
)
from scorevoting.properties import check_ccp
from scorevoting.score import ScoreFunction, knapsack_matrix, winners


def _names(inst, ballot):
    return inst.names(ballot.approved)


@pytest.fixture(scope="module")
def manipulable():
    fx = delta_not_strategyproof()
    return fx, Mechanism.score(fx.score_function, 2, names=fx.names)


def test_two_voter_witness_on_delta_matrix(manipulable):
    fx, mech = manipulable
    w = find_manipulation(mech, OracleBounds(n=2))
    inst = w.instance
    assert w.voter == 0
    assert [_names(inst, b) for b in inst.profile] == [["a", "d"], ["a", "c"]]
    assert _names(inst, w.deviant_ballot) == ["b", "d"]
    assert inst.names(w.outcome_sincere) == ["a", "c"]
    assert inst.names(w.outcome_deviant) == ["a", "d"]
    assert (w.utility_sincere, w.utility_deviant) == (1, 2)
    assert verify_witness(mech, w)


def test_stated_deviation_on_delta_matrix_replays(manipulable):
    fx, mech = manipulable
    prof = fx.election.profile
    dev = prof.replace(fx.deviation.voter, fx.deviation.ballot)
    assert mech.run(prof) == {0, 2}
    assert mech.run(dev) == {0, 3}


def test_search_is_independent_of_jobs(manipulable):
    _, mech = manipulable
    bounds = OracleBounds(n=2)
    assert find_manipulation(mech, bounds, jobs=3) == find_manipulation(mech, bounds)


def test_knapsack_voting_has_no_small_witness():
    for m in (2, 3):
        assert find_manipulation_all_W(knapsack_matrix(m), OracleBounds(n=2)) is None
        for space in ("w_subsets", "feasible"):
            for W in range(m + 1):
                mech = Mechanism.score(knapsack_matrix(m), W)
                assert find_manipulation(mech, OracleBounds(n=2, ballot_space=space)) is None


def test_verify_rejects_tampered_witnesses(manipulable):
    _, mech = manipulable
    w = find_manipulation(mech, OracleBounds(n=2))
    assert not verify_witness(mech, dataclasses.replace(w, utility_deviant=Fraction(3)))
    assert not verify_witness(mech, dataclasses.replace(w, outcome_deviant=frozenset({1, 3})))
    assert not verify_witness(mech, dataclasses.replace(w, voter=1))
    assert not verify_witness(mech, dataclasses.replace(w, deviant_ballot=w.sincere_ballot))


def test_witness_json_round_trip(manipulable):
    _, mech = manipulable
    w = find_manipulation(mech, OracleBounds(n=2))
    back = witness_from_dict(witness_to_dict(w))
    assert back == w
    assert verify_witness(mech, back)


def test_fair_two_voter_instance():
    fx = fair_unitary_deviation()
    inst = fx.election
    mech = Mechanism.fair(4, 2, names=inst.objects)
    assert inst.names(mech.run(inst.profile)) == ["a", "b"]
    # the stated switch of voter 2 helps voter 1, not voter 2
    dev = inst.profile.replace(fx.deviation.voter, fx.deviation.ballot)
    out = mech.run(dev)
    assert inst.names(out) == ["a", "c"]
    v2 = inst.profile[1]
    assert mech.utility(v2, out) < mech.utility(v2, mech.run(inst.profile))
    # a genuine witness from the same profile: voter 1 drops a
    w = find_deviation(mech, inst.profile)
    assert w.voter == 0 and _names(inst, w.deviant_ballot) == ["c"]
    assert inst.names(w.outcome_deviant) == ["a", "c"]
    assert (w.utility_sincere, w.utility_deviant) == (1, 2)
    assert verify_witness(mech, w)
    assert find_manipulation(mech, OracleBounds(n=2)) == w


def test_fair_fuzzing_finds_genuine_witness_and_is_seeded():
    mech = Mechanism.fair(4, 2, names=tuple("abcd"))
    w = fuzz_manipulation(mech, seed=2, iterations=2000, n=2)
    assert w is not None and verify_witness(mech, w)
    assert fuzz_manipulation(mech, seed=2, iterations=2000, n=2) == w


def test_weighted_fair_instance_deviation():
    fx = fair_weighted_manipulation()
    inst = fx.election
    mech = Mechanism.fair(inst.m, inst.budget, weights=inst.weights, names=inst.objects)
    w = find_deviation(mech, inst.profile)
    assert w is not None and verify_witness(mech, w)
    # first deviation in scan order: voter 5 approves only b
    assert w.voter == 4 and _names(inst, w.deviant_ballot) == ["b"]
    assert inst.names(w.outcome_deviant) == ["a", "b", "c", "d", "e"]
    assert (w.utility_sincere, w.utility_deviant) == (1, 2)


def test_utilitarian_mechanisms():
    unit = Mechanism.utilitarian(3, 2)
    assert unit.kind == "utilitarian_unitary"
    assert find_manipulation(unit, OracleBounds(n=2)) is None
    weighted = Mechanism.utilitarian(3, 3, weights=(1, 2, 2))
    assert weighted.kind == "utilitarian_weighted"
    p = Profile((Ballot.approval([1], 3), Ballot.approval([0, 2], 3)))
    assert weighted.run(p) in ({0, 1}, {0, 2})


def test_mechanism_validation():
    with pytest.raises(DomainError):
        Mechanism("lottery", 2)
    with pytest.raises(DomainError):
        Mechanism.score(knapsack_matrix(2), 3)
    with pytest.raises(DomainError):
        Mechanism("utilitarian_unitary", 2, weights=(1, 2), budget=2)


def test_search_budget():
    mech = Mechanism.score(knapsack_matrix(4), 2)
    with pytest.raises(ResourceLimitError):
        find_manipulation(mech, OracleBounds(n=5, max_explored=1000))


def test_tally_oracle_witness_replays(manipulable):
    fx, _ = manipulable
    tw = find_tally_manipulation(fx.score_function, 5)
    assert tw is not None and tw.replay(fx.score_function)
    assert find_tally_manipulation(knapsack_matrix(3), 3) is None


def test_tally_oracle_agrees_with_ccp_on_random_total_matrices():
    from scorevoting.properties import is_total

    rng = random.Random(11)
    checked = 0
    while checked < 12:
        M = [[Fraction(rng.randint(1, 8), rng.randint(1, 3)) if i == j else Fraction(rng.randint(-3, 3), rng.randint(1, 3))
              for j in range(3)] for i in range(3)]
        sf = ScoreFunction.of(M)
        if not is_total(sf, stop_early=True).total:
            continue
        checked += 1
        ccp = check_ccp(sf, max_tally=3).holds_on_bounds
        assert ccp == (find_tally_manipulation(sf, 3) is None)


def test_score_mechanism_matches_winner_rule():
    sf = delta_not_strategyproof().score_function
    mech = Mechanism.score(sf, 2)
    for combo in itertools.combinations(range(4), 2):
        p = Profile((Ballot.approval(combo, 4),))
        assert mech.run(p) == winners(sf, [int(o in combo) for o in range(4)], 2).winners
