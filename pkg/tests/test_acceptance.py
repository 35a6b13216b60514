"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import itertools
import random
import statistics
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES
from qp_oracle import exhaustive_projection
from scorevoting.errors import ResourceLimitError
from scorevoting.instances import (
    delta_not_strategyproof,
    delta_not_total,
    diagonal_total,
    fair_weighted_manipulation,
    sports_budget_example,
)
from scorevoting.model import Ballot, ElectionInstance, Profile, sincere_utility
from scorevoting.oracle import FEASIBLE, W_SUBSETS, ALL_SUBSETS, Mechanism, OracleBounds, find_manipulation, \
    find_manipulation_all_W, find_tally_manipulation
from scorevoting.projection import (
    EXACT_PROJECTION,
    SPHERE_REPAIRED,
    closest_strategyproof,
    closure_system,
    dykstra,
    nearest_cover_point,
)
from scorevoting.properties import check_ccp, check_delta, check_delta_plus, is_neutral, is_total, neutral_matrix
from scorevoting.score import ScoreFunction, ScoreMatrix, TieBreak, knapsack_matrix, tally, winners
from scorevoting.welfare import UTILITARIAN, solve_brute_force, solve_fair_exact, solve_utilitarian_dp


def report(number, title, ok, elapsed, limit, detail=""):
    within = elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    line = f"[{number:>2}] {verdict} {title}: {detail} ({elapsed:.4g}s, limit {limit:g}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert within, line


def test_01_sports_budget_winners():
    fx = sports_budget_example()
    e = tally(fx.election.profile, 4)
    ws = winners(fx.score_function, e, 2)
    times = []
    for _ in range(20):
        t0 = time.perf_counter()
        winners(fx.score_function, tally(fx.election.profile, 4), 2)
        times.append(time.perf_counter() - t0)
    ok = e == (2, 4, 4, 6) and ws.winners == {1, 3} and ws.scores == (6, 12, 0, 10)
    report(1, "4x4 sports example", ok, statistics.median(times), 1e-3,
           f"tally {e}, scores {tuple(int(s) for s in ws.scores)}, winners {fx.election.names(ws.winners)}")


def test_02_diagonal_matrix_is_total_and_differs_from_knapsack():
    t0 = time.perf_counter()
    fx = diagonal_total()
    total = is_total(fx.score_function).total
    e = tally(fx.election.profile, 2)
    ks = winners(knapsack_matrix(2), e, 1).winners
    sv = winners(fx.score_function, e, 1).winners
    elapsed = time.perf_counter() - t0
    report(2, "diag(1,3) total, knapsack {o1} vs score {o2}", total and ks == {0} and sv == {1}, elapsed, 1,
           f"total={total}, knapsack {sorted(ks)}, score {sorted(sv)}")


def test_03_delta_matrix_that_is_not_total():
    t0 = time.perf_counter()
    sf = delta_not_total().score_function
    delta = check_delta(sf)
    rep = is_total(sf)
    elapsed = time.perf_counter() - t0
    ok = delta == [] and not rep.total and rep.infeasible_targets() == [(2, frozenset({0, 1}))]
    report(3, "delta holds, not total", ok, elapsed, 1,
           f"delta violations {len(delta)}, infeasible {rep.infeasible_targets()}")


def test_04_delta_matrix_with_two_voter_manipulation():
    t0 = time.perf_counter()
    fx = delta_not_strategyproof()
    sf = fx.score_function
    delta = check_delta(sf)
    plus = check_delta_plus(sf, distinct_only=True)
    ccp = check_ccp(sf, max_tally=5)
    w = find_manipulation(Mechanism.score(sf, 2, names=fx.names), OracleBounds(n=2))
    elapsed = time.perf_counter() - t0
    inst = w.instance
    got = (w.voter, inst.names(w.sincere_ballot.approved), inst.names(w.deviant_ballot.approved),
           inst.names(w.outcome_sincere), inst.names(w.outcome_deviant), w.utility_sincere, w.utility_deviant)
    want = (0, ["a", "d"], ["b", "d"], ["a", "c"], ["a", "d"], 1, 2)
    ok = delta == [] and plus != [] and not ccp.holds_on_bounds and got == want
    report(4, "delta holds, delta_plus and CCP fail, witness", ok, elapsed, 30,
           f"v{w.voter + 1}: {got[1]} -> {got[2]}, outcome {got[3]} -> {got[4]}, utility {got[5]} -> {got[6]}")


def test_05_knapsack_voting_has_no_witness():
    t0 = time.perf_counter()
    found = {}
    for space in (W_SUBSETS, FEASIBLE, ALL_SUBSETS):
        for m in range(1, 5):
            w = find_manipulation_all_W(knapsack_matrix(m), OracleBounds(n=3, ballot_space=space))
            found[(space, m)] = w is not None
    elapsed = time.perf_counter() - t0
    report(5, "identity matrix, m<=4, n<=3, all W", not any(found.values()), elapsed, 300,
           f"{sum(found.values())} witnesses over {len(found)} (ballot space, m) searches")


def test_06_neutral_matrices_elect_like_knapsack():
    rng = random.Random(6)
    t0 = time.perf_counter()
    mismatches, checked = 0, 0
    for k in range(100):
        m = 1 + k % 4
        c = Fraction(rng.randint(1, 12), rng.randint(1, 4))
        lam = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(m)]
        M = neutral_matrix(c, lam)
        assert is_neutral(M), "generated matrix is not neutral"
        sf, ks = ScoreFunction(M, TieBreak.natural(m)), knapsack_matrix(m)
        for e in itertools.product(range(5), repeat=m):
            for W in range(m + 1):
                checked += 1
                mismatches += winners(sf, e, W).winners != winners(ks, e, W).winners
    elapsed = time.perf_counter() - t0
    report(6, "100 neutral matrices vs knapsack voting", mismatches == 0, elapsed, 120,
           f"{mismatches} mismatches over {checked} (tally, W) pairs")


def test_07_ccp_agrees_with_manipulation_search_at_three_objects():
    rng = random.Random(7)
    t0 = time.perf_counter()
    total, disagreements = 0, 0
    for _ in range(200):
        M = [[Fraction(rng.randint(1, 8), rng.randint(1, 3)) if i == j else Fraction(rng.randint(-3, 3),
              rng.randint(1, 3)) for j in range(3)] for i in range(3)]
        sf = ScoreFunction.of(M)
        if not is_total(sf, stop_early=True).total:
            continue
        total += 1
        ccp_holds = check_ccp(sf, max_tally=4).holds_on_bounds
        no_witness = find_tally_manipulation(sf, 4) is None
        disagreements += ccp_holds != no_witness
    elapsed = time.perf_counter() - t0
    report(7, "CCP verdict vs oracle on total 3x3 matrices", total > 0 and disagreements == 0, elapsed, 600,
           f"{disagreements} disagreements among {total} total matrices of 200")


def test_08_fair_weighted_manipulation():
    t0 = time.perf_counter()
    fx = fair_weighted_manipulation()
    inst = fx.election
    sincere = solve_fair_exact(inst).winning_set
    dev = inst.with_profile(inst.profile.replace(fx.deviation.voter, fx.deviation.ballot))
    after = solve_fair_exact(dev).winning_set
    v5 = inst.profile[fx.deviation.voter]
    u0, u1 = sincere_utility(v5, sincere), sincere_utility(v5, after)
    elapsed = time.perf_counter() - t0
    ok = inst.names(sincere) == ["a", "e", "g"] and inst.names(after) == list("abcdef") and (u0, u1) == (1, 3)
    report(8, "fair objective is manipulable", ok, elapsed, 1,
           f"{inst.names(sincere)} -> {inst.names(after)}, voter 5 utility {u0} -> {u1}")


def test_09_dp_matches_exhaustive_optimum():
    rng = random.Random(9)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(100):
        m, n = rng.randint(1, 8), rng.randint(1, 5)
        weights = [rng.randint(1, 10) for _ in range(m)]
        budget = rng.randint(0, sum(weights))
        ballots = tuple(Ballot.approval([o for o in range(m) if rng.random() < 0.5], m) for _ in range(n))
        inst = ElectionInstance(tuple(f"p{i}" for i in range(m)), tuple(weights), budget, Profile(ballots))
        dp = solve_utilitarian_dp(inst)
        bad += not inst.is_feasible(dp.winning_set) or \
            dp.objective_value != solve_brute_force(inst, UTILITARIAN).objective_value
    elapsed = time.perf_counter() - t0
    report(9, "knapsack DP vs brute force", bad == 0, elapsed, 60, f"{bad} mismatches on 100 instances")


def test_10_projection_matches_qp_oracle_and_outputs_are_strict():
    rng = random.Random(10)
    t0 = time.perf_counter()
    worst, bad_strict, counts = 0.0, 0, {}
    for k in range(50):
        m = 2 if k < 25 else 3
        M = ScoreMatrix(tuple(tuple(Fraction(rng.randint(-12, 12), rng.randint(1, 4)) for _ in range(m))
                              for _ in range(m)))
        tb = TieBreak.natural(m)
        x0 = np.array([float(v) for v in M.flat()])
        system = closure_system(m, tb)
        run = dykstra(x0, system)
        _, qp = exhaustive_projection(x0, system.A())
        worst = max(worst, abs(float(np.linalg.norm(run.point - x0)) - qp))
        # a coarse cover keeps the repair search within its point budget at m = 3
        try:
            res = closest_strategyproof(M, tb, eps=0.05 if m == 2 else 0.5)
            kind = res.status.kind
        except ResourceLimitError:
            kind = "ResourceLimit"
        counts[kind] = counts.get(kind, 0) + 1
        if kind in (EXACT_PROJECTION, SPHERE_REPAIRED):
            bad_strict += check_delta_plus(ScoreFunction(res.matrix, tb), distinct_only=True) != []
    elapsed = time.perf_counter() - t0
    report(10, "projection vs QP oracle, strict outputs", worst <= 1e-6 and bad_strict == 0, elapsed, 300,
           f"max distance gap {worst:.2e}, {bad_strict} non-strict outputs, statuses {dict(sorted(counts.items()))}")


def test_11_sphere_cover_density():
    m, d = 2, 4
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    details, ok = [], True
    for eps in (1e-2, 1e-3):
        gap = 0.0
        for _ in range(20000):
            u = rng.normal(size=d)
            u /= np.linalg.norm(u)
            # distance to one genuine cover point bounds the nearest-point gap from above
            gap = max(gap, float(np.linalg.norm(nearest_cover_point(u, eps) - u)))
        bound = m * m * np.sqrt(2 * eps)
        ok = ok and gap <= bound
        details.append(f"eps={eps:g}: gap {gap:.4g} <= {bound:.4g}")
    elapsed = time.perf_counter() - t0
    report(11, "sphere cover density, m=2", ok, elapsed, 60, "; ".join(details))
