"""Worked instances used by the tests, the scripts and the fixture corpus.

Each one is stored on disk as a JSON bundle with optional keys ``names``,
``matrix``, ``tiebreak``, ``election``, ``W`` and ``deviation``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .model import Ballot, ElectionInstance, Profile, election_from_dict, election_to_dict, fraction_to_json
from .score import ScoreFunction, ScoreMatrix, TieBreak, default_names, tiebreak_from_json, tiebreak_to_json


@dataclass(frozen=True)
class Deviation:
    voter: int  # zero-based
    ballot: Ballot


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    names: tuple
    score_function: Optional[ScoreFunction] = None
    election: Optional[ElectionInstance] = None
    W: Optional[int] = None
    deviation: Optional[Deviation] = None


def _approval(names, objects):
    pos = {n: i for i, n in enumerate(names)}
    return Ballot.approval([pos[o] for o in objects], len(names))


def _unit_election(names, budget, ballots):
    return ElectionInstance(tuple(names), (1,) * len(names), budget,
                            Profile(tuple(_approval(names, b) for b in ballots)))


def sports_budget_example() -> Fixture:
    """Four projects, fund two, penalise funding both sports projects."""
    names = tuple(default_names(4))
    M = ((3, 0, 0, 0), (0, 3, 0, 0), (0, 0, 3, -2), (0, 0, -2, 3))
    ballots = [("o3", "o4")] * 4 + [("o1", "o2")] * 2 + [("o2", "o4")] * 2
    return Fixture("sports_budget", "4x4 matrix discouraging two sports projects; 8 voters, W=2", names,
                   ScoreFunction.of(M), _unit_election(names, 2, ballots), W=2)


def diagonal_total() -> Fixture:
    """diag(1, 3): total, yet differs from knapsack voting."""
    names = tuple(default_names(2))
    ballots = [("o1",), ("o1",), ("o2",)]
    return Fixture("diagonal_total", "diag(1,3) score function with ballots {o1},{o1},{o2}, W=1", names,
                   ScoreFunction.of(((1, 0), (0, 3))), _unit_election(names, 1, ballots), W=1)


def delta_not_total() -> Fixture:
    names = tuple(default_names(3))
    return Fixture("delta_not_total", "3x3 matrix satisfying delta that cannot elect {o1,o2} at W=2", names,
                   ScoreFunction.of(((4, 0, 0), (0, 4, 0), (3, 3, 100))))


def delta_not_strategyproof() -> Fixture:
    """4x4 matrix satisfying delta with a two-voter manipulation."""
    names = ("a", "b", "c", "d")
    M = ((101, 0, 0, 0), (0, 3, 0, 0), (0, 0, 100, 0), (0, 2, 0, 99))
    election = _unit_election(names, 2, [("a", "d"), ("a", "c")])
    return Fixture("delta_not_strategyproof", "4x4 matrix satisfying delta; voter 1 gains by lying", names,
                   ScoreFunction.of(M), election, W=2, deviation=Deviation(0, _approval(names, ("b", "d"))))


def fair_weighted_manipulation() -> Fixture:
    """Fair approval election with weights: voter 5 gains by approving a different set."""
    names = ("a", "b", "c", "d", "e", "f", "g")
    weights = (5, 5, 10, 20, 15, 5, 40)
    ballots = [("a", "e", "g"), ("d", "g"), ("a", "e", "g"), ("d", "g"), ("b", "c", "f", "g"), ("a", "e", "g")]
    election = ElectionInstance(names, weights, 60, Profile(tuple(_approval(names, b) for b in ballots)))
    dev = Deviation(4, _approval(names, ("a", "b", "c", "d", "e", "f")))
    return Fixture("fair_weighted_manipulation", "7 weighted objects, budget 60, 6 voters; fair objective",
                   names, election=election, deviation=dev)


def fair_unitary_deviation() -> Fixture:
    """Two voters, four unit objects, W=2: a deviation that changes the fair outcome."""
    names = ("a", "b", "c", "d")
    election = _unit_election(names, 2, [("a", "c"), ("a", "b")])
    return Fixture("fair_unitary_deviation", "4 unit objects, W=2; voter 2 switches to {c,d}", names,
                   election=election, W=2, deviation=Deviation(1, _approval(names, ("c", "d"))))


def first_class_ranking() -> Fixture:
    """Ranking ballots over x, y, z with W=1 whose first-class sets are {x} and {y}."""
    names = ("x", "y", "z")
    profile = Profile((Ballot.ranking((3, 2, 1)), Ballot.ranking((2, 3, 1))))
    return Fixture("first_class_ranking", "two ranking voters over x,y,z, unit weights, W=1", names,
                   election=ElectionInstance(names, (1, 1, 1), 1, profile), W=1)


ALL_FIXTURES = (
    sports_budget_example,
    diagonal_total,
    delta_not_total,
    delta_not_strategyproof,
    fair_weighted_manipulation,
    fair_unitary_deviation,
    first_class_ranking,
)


# -- bundles ---------------------------------------------------------------


def fixture_to_dict(fx: Fixture) -> dict:
    out = {"name": fx.name, "description": fx.description, "names": list(fx.names)}
    if fx.score_function is not None:
        out["matrix"] = [[fraction_to_json(v) for v in row] for row in fx.score_function.matrix.entries]
        out["tiebreak"] = tiebreak_to_json(fx.score_function.tiebreak, fx.names)
    if fx.election is not None:
        out["election"] = election_to_dict(fx.election)
    if fx.W is not None:
        out["W"] = fx.W
    if fx.deviation is not None:
        out["deviation"] = {"voter": fx.deviation.voter + 1, "ballot": sorted(fx.names[o] for o in fx.deviation.ballot.approved)}
    return out


def fixture_from_dict(data: dict) -> Fixture:
    try:
        names = tuple(str(n) for n in data["names"])
        sf = None
        if "matrix" in data:
            M = ScoreMatrix(tuple(tuple(row) for row in data["matrix"]))
            tb = tiebreak_from_json(data["tiebreak"], names) if "tiebreak" in data else TieBreak.natural(M.m)
            sf = ScoreFunction(M, tb)
        election = election_from_dict(data["election"]) if "election" in data else None
        dev = None
        if "deviation" in data:
            d = data["deviation"]
            dev = Deviation(int(d["voter"]) - 1, _approval(names, [str(x) for x in d["ballot"]]))
        return Fixture(str(data.get("name", "")), str(data.get("description", "")), names, sf, election,
                       data.get("W"), dev)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed fixture bundle: {exc}") from exc


def load_fixture(path) -> Fixture:
    with open(path) as fh:
        try:
            return fixture_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON: {exc}") from exc


def dump_fixture(fx: Fixture, path) -> None:
    with open(path, "w") as fh:
        json.dump(fixture_to_dict(fx), fh, indent=2)
        fh.write("\n")
