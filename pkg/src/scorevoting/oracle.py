"""Brute-force search for single-voter manipulations.

A bounded search can exhibit a manipulation but never prove
strategyproofness; ``None`` only means no witness exists within the bounds.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError, PreconditionError, ResourceLimitError
from .model import (
    APPROVAL,
    Ballot,
    ElectionInstance,
    Profile,
    fraction_to_json,
    sincere_utility,
    weighted_utility,
)
from .score import ScoreFunction, default_names, tally, winners
from .welfare import solve_fair_exact, solve_utilitarian_dp, solve_utilitarian_unitary

SCORE = "score"
UTILITARIAN_UNITARY = "utilitarian_unitary"
UTILITARIAN_WEIGHTED = "utilitarian_weighted"
FAIR_EXACT = "fair_exact"

# ballot spaces
W_SUBSETS = "w_subsets"
FEASIBLE = "feasible"
ALL_SUBSETS = "all"

DEFAULT_MAX_EXPLORED = 20_000_000


@dataclass(frozen=True)
class Mechanism:
    """An executable social choice function over approval profiles.

    Score mechanisms elect ``W`` objects; welfare mechanisms use ``weights``
    and ``budget``.
    """

    kind: str
    m: int
    score_function: Optional[ScoreFunction] = None
    W: Optional[int] = None
    weights: Optional[tuple] = None
    budget: Optional[Fraction] = None
    names: Optional[tuple] = None
    weighted_utility: bool = False

    def __post_init__(self):
        if self.kind not in (SCORE, UTILITARIAN_UNITARY, UTILITARIAN_WEIGHTED, FAIR_EXACT):
            raise DomainError(f"unknown mechanism {self.kind!r}")
        if self.names is None:
            object.__setattr__(self, "names", tuple(default_names(self.m)))
        if self.kind == SCORE:
            if self.score_function is None or self.score_function.m != self.m:
                raise DomainError("score mechanisms need a score function of matching size")
            if self.W is None or not 0 <= self.W <= self.m:
                raise DomainError("score mechanisms need 0 <= W <= m")
            object.__setattr__(self, "weights", (Fraction(1),) * self.m)
            object.__setattr__(self, "budget", Fraction(self.W))
        else:
            w = self.weights if self.weights is not None else (1,) * self.m
            object.__setattr__(self, "weights", tuple(Fraction(x) for x in w))
            if self.budget is None:
                raise DomainError("welfare mechanisms need a budget")
            object.__setattr__(self, "budget", Fraction(self.budget))
            if self.kind == UTILITARIAN_UNITARY and any(x != 1 for x in self.weights):
                raise DomainError("the unitary mechanism needs unit weights")

    @classmethod
    def score(cls, sf: ScoreFunction, W: int, names=None) -> "Mechanism":
        return cls(SCORE, sf.m, score_function=sf, W=W, names=names)

    @classmethod
    def fair(cls, m, budget, weights=None, names=None, weighted_utility=False) -> "Mechanism":
        return cls(FAIR_EXACT, m, weights=weights, budget=budget, names=names, weighted_utility=weighted_utility)

    @classmethod
    def utilitarian(cls, m, budget, weights=None, names=None, weighted_utility=False) -> "Mechanism":
        unit = weights is None or all(Fraction(x) == 1 for x in weights)
        kind = UTILITARIAN_UNITARY if unit else UTILITARIAN_WEIGHTED
        return cls(kind, m, weights=weights, budget=budget, names=names, weighted_utility=weighted_utility)

    def instance(self, profile: Profile) -> ElectionInstance:
        return ElectionInstance(self.names, self.weights, self.budget, profile)

    def run(self, profile: Profile) -> frozenset:
        if self.kind == SCORE:
            return winners(self.score_function, tally(profile, self.m), self.W).winners
        inst = self.instance(profile)
        if self.kind == UTILITARIAN_UNITARY:
            return solve_utilitarian_unitary(inst).winning_set
        if self.kind == UTILITARIAN_WEIGHTED:
            return solve_utilitarian_dp(inst).winning_set
        return solve_fair_exact(inst).winning_set

    def utility(self, sincere: Ballot, outcome) -> Fraction:
        if self.weighted_utility:
            return weighted_utility(sincere, outcome, self.weights)
        return sincere_utility(sincere, outcome)

    def ballot_space(self, space: Optional[str] = None) -> list:
        """Candidate approval ballots, in a fixed canonical order."""
        space = space or (W_SUBSETS if self.kind == SCORE else FEASIBLE)
        m = self.m
        if space == W_SUBSETS:
            if self.W is None:
                raise PreconditionError("W-subset ballots need a fixed W")
            combos = itertools.combinations(range(m), self.W)
        elif space in (FEASIBLE, ALL_SUBSETS):
            combos = (c for r in range(m + 1) for c in itertools.combinations(range(m), r))
            if space == FEASIBLE:
                combos = (c for c in combos if sum((self.weights[o] for o in c), Fraction(0)) <= self.budget)
        else:
            raise DomainError(f"unknown ballot space {space!r}")
        return [Ballot.approval(c, m) for c in combos]


@dataclass(frozen=True)
class OracleBounds:
    n: int = 3
    n_min: int = 1
    ballot_space: Optional[str] = None
    max_explored: int = DEFAULT_MAX_EXPLORED


@dataclass(frozen=True)
class ManipulationWitness:
    instance: ElectionInstance  # holds the sincere profile
    voter: int
    sincere_ballot: Ballot
    deviant_ballot: Ballot
    outcome_sincere: frozenset
    outcome_deviant: frozenset
    utility_sincere: Fraction
    utility_deviant: Fraction

    def describe(self) -> str:
        names = self.instance.names
        return (
            f"voter {self.voter + 1}: {names(self.sincere_ballot.approved)} -> "
            f"{names(self.deviant_ballot.approved)}; outcome {names(self.outcome_sincere)} -> "
            f"{names(self.outcome_deviant)}; utility {self.utility_sincere} -> {self.utility_deviant}"
        )


def _deviation_scan(mech, profile, space, voters=None):
    """First profitable deviation from ``profile`` or None; also returns runs made."""
    runs = 1
    sincere_out = mech.run(profile)
    seen = set()
    for v in (range(profile.n) if voters is None else voters):
        sincere = profile[v]
        if voters is None and sincere in seen:
            continue  # same ballot, same deviations
        seen.add(sincere)
        u0 = mech.utility(sincere, sincere_out)
        for b in space:
            if b == sincere:
                continue
            runs += 1
            dev_profile = profile.replace(v, b)
            out = mech.run(dev_profile)
            u1 = mech.utility(sincere, out)
            if u1 > u0:
                w = ManipulationWitness(mech.instance(profile), v, sincere, b, sincere_out, out, u0, u1)
                return w, runs
    return None, runs


def deviator_first(w: ManipulationWitness) -> ManipulationWitness:
    """Relabel voters so the deviating voter is voter 1 (mechanisms here are anonymous)."""
    ballots = list(w.instance.profile.ballots)
    moved = [ballots[w.voter]] + ballots[: w.voter] + ballots[w.voter + 1:]
    inst = w.instance.with_profile(Profile(tuple(moved)))
    return ManipulationWitness(inst, 0, w.sincere_ballot, w.deviant_ballot, w.outcome_sincere,
                               w.outcome_deviant, w.utility_sincere, w.utility_deviant)


def find_deviation(mech: Mechanism, profile: Profile, ballot_space: Optional[str] = None):
    """Lexicographically first profitable single-voter deviation from a fixed profile."""
    space = mech.ballot_space(ballot_space)
    return _deviation_scan(mech, profile, space)[0]


def _search_chunk(args):
    mech, n, first, space_name, budget = args
    space = mech.ballot_space(space_name)
    explored = 0
    for rest in itertools.combinations_with_replacement(range(first, len(space)), n - 1):
        profile = Profile(tuple(space[i] for i in (first,) + rest))
        w, runs = _deviation_scan(mech, profile, space)
        explored += runs
        if w is not None:
            return deviator_first(w), explored
        if explored > budget:
            raise ResourceLimitError("manipulation search exceeded its budget", explored=explored)
    return None, explored


def find_manipulation(mech: Mechanism, bounds: OracleBounds = OracleBounds(), jobs: int = 1):
    """Exhaustive search for the lexicographically first manipulation witness.

    Mechanisms are anonymous, so profiles are multisets of ballots: sorted
    index tuples into the candidate list, visited by number of voters and then
    lexicographically; inside a profile by voter and deviant ballot. The
    witness is relabelled so the deviator is voter 1. The answer does not
    depend on ``jobs``.
    """
    space = mech.ballot_space(bounds.ballot_space)
    k = len(space)
    total = sum(math.comb(k + n - 1, n) * (1 + n * k) for n in range(max(bounds.n_min, 1), bounds.n + 1))
    if total > bounds.max_explored:
        raise ResourceLimitError(
            f"search space of {total} mechanism runs exceeds max_explored={bounds.max_explored}",
            explored=0,
        )
    if k == 0:
        return None
    for n in range(max(bounds.n_min, 1), bounds.n + 1):
        chunks = [(mech, n, first, bounds.ballot_space, bounds.max_explored) for first in range(k)]
        if jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_search_chunk, chunks))
        else:
            results = []
            for ch in chunks:
                results.append(_search_chunk(ch))
                if results[-1][0] is not None:
                    break
        for w, _ in results:
            if w is not None:
                return w
    return None


def find_manipulation_all_W(sf: ScoreFunction, bounds: OracleBounds = OracleBounds(), W_values=None, jobs=1):
    """Run :func:`find_manipulation` for every ``W`` (default ``0..m``); first witness wins."""
    W_values = range(sf.m + 1) if W_values is None else W_values
    for W in W_values:
        w = find_manipulation(Mechanism.score(sf, W), bounds, jobs=jobs)
        if w is not None:
            return w
    return None


@dataclass(frozen=True)
class TallyManipulation:
    """A manipulation of a score mechanism with the other voters summarised by their tally."""

    W: int
    others: tuple  # tally of every voter except the manipulator
    sincere: frozenset
    deviant: frozenset
    outcome_sincere: frozenset
    outcome_deviant: frozenset
    utility_sincere: int
    utility_deviant: int

    def replay(self, sf: ScoreFunction) -> bool:
        def run(ballot):
            e = [x + (o in ballot) for o, x in enumerate(self.others)]
            return winners(sf, e, self.W).winners

        o0, o1 = run(self.sincere), run(self.deviant)
        return (
            o0 == self.outcome_sincere
            and o1 == self.outcome_deviant
            and len(self.sincere & o0) == self.utility_sincere
            and len(self.sincere & o1) == self.utility_deviant
            and self.utility_deviant > self.utility_sincere
        )


def find_tally_manipulation(sf: ScoreFunction, max_tally: int, W_values=None,
                            max_explored: int = DEFAULT_MAX_EXPLORED) -> Optional[TallyManipulation]:
    """Manipulation search for a score mechanism over bounded electorates.

    Score mechanisms only see the tally, so the other voters are a tally with
    entries in ``[0, max_tally]`` and the manipulator casts ``W``-subset
    ballots, sincere or not. Order: ``W``, other tally (lexicographic),
    sincere ballot, deviant ballot. These are the same bounds as
    :func:`~scorevoting.properties.check_ccp` with the same ``max_tally``.
    """
    m = sf.m
    W_values = range(m + 1) if W_values is None else W_values
    cost = 0
    for W in W_values:
        k = math.comb(m, W)
        cost += (max_tally + 1) ** m * k
    if cost > max_explored:
        raise ResourceLimitError(f"tally search needs {cost} mechanism runs (> {max_explored})", explored=0)
    for W in W_values:
        ballots = [frozenset(c) for c in itertools.combinations(range(m), W)]
        for others in itertools.product(range(max_tally + 1), repeat=m):
            outs = [winners(sf, [x + (o in b) for o, x in enumerate(others)], W).winners for b in ballots]
            for S, out_s in zip(ballots, outs):
                u0 = len(S & out_s)
                if u0 == len(S):
                    continue
                for B, out_b in zip(ballots, outs):
                    u1 = len(S & out_b)
                    if u1 > u0:
                        return TallyManipulation(W, others, S, B, out_s, out_b, u0, u1)
    return None


def verify_witness(mech: Mechanism, w: ManipulationWitness) -> bool:
    """Replay both runs and both utilities; true iff everything matches and the gain is strict."""
    try:
        profile = w.instance.profile
        if not 0 <= w.voter < profile.n or profile[w.voter] != w.sincere_ballot:
            return False
        out0 = mech.run(profile)
        out1 = mech.run(profile.replace(w.voter, w.deviant_ballot))
        u0 = mech.utility(w.sincere_ballot, out0)
        u1 = mech.utility(w.sincere_ballot, out1)
    except (DomainError, PreconditionError):
        return False
    return (
        out0 == w.outcome_sincere
        and out1 == w.outcome_deviant
        and u0 == w.utility_sincere
        and u1 == w.utility_deviant
        and u1 > u0
    )


def fuzz_manipulation(mech: Mechanism, seed: int, iterations: int, n: int,
                      ballot_space: Optional[str] = None) -> Optional[ManipulationWitness]:
    """Sample random sincere profiles of ``n`` voters and random single deviations."""
    if iterations < 1:
        raise PreconditionError("iterations must be at least 1")
    rng = random.Random(seed)
    space = mech.ballot_space(ballot_space)
    if not space:
        return None
    for _ in range(iterations):
        profile = Profile(tuple(rng.choice(space) for _ in range(n)))
        v = rng.randrange(n)
        b = rng.choice(space)
        if b == profile[v]:
            continue
        out0 = mech.run(profile)
        out1 = mech.run(profile.replace(v, b))
        u0 = mech.utility(profile[v], out0)
        u1 = mech.utility(profile[v], out1)
        if u1 > u0:
            w = ManipulationWitness(mech.instance(profile), v, profile[v], b, out0, out1, u0, u1)
            assert verify_witness(mech, w)
            return w
    return None


# -- witness JSON ----------------------------------------------------------


def witness_to_dict(w: ManipulationWitness) -> dict:
    from .model import election_to_dict

    names = w.instance.names
    return {
        "instance": election_to_dict(w.instance),
        "voter": w.voter + 1,  # one-based, as in fixture bundles
        "sincere_ballot": names(w.sincere_ballot.approved),
        "deviant_ballot": names(w.deviant_ballot.approved),
        "outcome_sincere": names(w.outcome_sincere),
        "outcome_deviant": names(w.outcome_deviant),
        "utility_sincere": fraction_to_json(w.utility_sincere),
        "utility_deviant": fraction_to_json(w.utility_deviant),
    }


def witness_from_dict(data: dict) -> ManipulationWitness:
    from .model import election_from_dict, to_fraction

    inst = election_from_dict(data["instance"])
    if inst.profile.kind not in (APPROVAL, None):
        raise DomainError("witnesses are recorded for approval profiles")
    m = inst.m

    def idx(names_: Sequence[str]):
        return frozenset(inst.index(x) for x in names_)

    return ManipulationWitness(
        inst,
        int(data["voter"]) - 1,
        Ballot.approval(sorted(idx(data["sincere_ballot"])), m),
        Ballot.approval(sorted(idx(data["deviant_ballot"])), m),
        idx(data["outcome_sincere"]),
        idx(data["outcome_deviant"]),
        to_fraction(data["utility_sincere"]),
        to_fraction(data["utility_deviant"]),
    )
