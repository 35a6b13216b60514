"""Core election model: ballots, profiles, instances and sincere utilities.

All quantities are exact :class:`fractions.Fraction` values. Objects are
identified by their index in ``range(m)``; voters by their position in the
profile.

Election JSON layout::

    {"objects": ["a", ...], "weights": [1, ...], "budget": W,
     "ballot_kind": "approval" | "ranking" | "value",
     "ballots": [[...], ...]}

Approval ballots list object names. Ranking ballots list object names from
least to most preferred, so the object at position ``r`` (0-based) gets value
``r + 1`` and the favourite gets ``m``. Value ballots list one rational per
object. Rationals are integers or ``"p/q"`` strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BallotKindError, DomainError

APPROVAL = "approval"
RANKING = "ranking"
VALUE = "value"
BALLOT_KINDS = (APPROVAL, RANKING, VALUE)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError(f"not a rational: {x!r}")
    if isinstance(x, (int, str)):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {x!r}") from exc
    if isinstance(x, float):
        return Fraction(x)
    raise DomainError(f"not a rational: {x!r}")


def fraction_to_json(x: Fraction):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Ballot:
    """One voter's declaration, stored as a value per object.

    Approval ballots hold 0/1 values, rankings hold a permutation of
    ``1..m`` (higher is better) and value ballots hold arbitrary rationals.
    """

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in BALLOT_KINDS:
            raise BallotKindError(f"unknown ballot kind {self.kind!r}")
        vals = tuple(to_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        m = len(vals)
        if m < 1:
            raise DomainError("a ballot needs at least one object")
        if self.kind == APPROVAL and any(v not in (0, 1) for v in vals):
            raise DomainError("approval ballots take values in {0, 1}")
        if self.kind == RANKING and sorted(vals) != list(range(1, m + 1)):
            raise DomainError("a ranking must use each rank 1..m exactly once")

    @classmethod
    def approval(cls, objects: Iterable[int], m: int) -> "Ballot":
        chosen = list(objects)
        if len(set(chosen)) != len(chosen):
            raise DomainError("approval ballot lists an object twice")
        for o in chosen:
            _check_object(o, m)
        s = set(chosen)
        return cls(APPROVAL, tuple(1 if i in s else 0 for i in range(m)))

    @classmethod
    def ranking(cls, ranks: Sequence[int]) -> "Ballot":
        return cls(RANKING, tuple(ranks))

    @classmethod
    def value(cls, values: Sequence) -> "Ballot":
        return cls(VALUE, tuple(values))

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def approved(self) -> frozenset:
        if self.kind != APPROVAL:
            raise BallotKindError("only approval ballots have an approved set")
        return frozenset(i for i, v in enumerate(self.values) if v)


@dataclass(frozen=True)
class Profile:
    ballots: tuple

    def __post_init__(self):
        ballots = tuple(self.ballots)
        object.__setattr__(self, "ballots", ballots)
        if ballots:
            kind, m = ballots[0].kind, ballots[0].m
            for b in ballots:
                if b.kind != kind or b.m != m:
                    raise DomainError("all ballots must share one kind and one universe")

    @property
    def n(self) -> int:
        return len(self.ballots)

    @property
    def kind(self):
        return self.ballots[0].kind if self.ballots else None

    def __len__(self):
        return len(self.ballots)

    def __iter__(self):
        return iter(self.ballots)

    def __getitem__(self, v):
        return self.ballots[v]

    def replace(self, voter: int, ballot: Ballot) -> "Profile":
        """The profile ``(ballot; B_-voter)``."""
        bs = list(self.ballots)
        bs[voter] = ballot
        return Profile(tuple(bs))


@dataclass(frozen=True)
class ElectionInstance:
    objects: tuple
    weights: tuple
    budget: Fraction
    profile: Profile = field(default_factory=lambda: Profile(()))

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "weights", tuple(to_fraction(w) for w in self.weights))
        object.__setattr__(self, "budget", to_fraction(self.budget))
        if not isinstance(self.profile, Profile):
            object.__setattr__(self, "profile", Profile(tuple(self.profile)))
        m = len(self.objects)
        if m < 1:
            raise DomainError("an election needs at least one object")
        if len(set(self.objects)) != m:
            raise DomainError("object names must be unique")
        if len(self.weights) != m:
            raise DomainError("one weight per object is required")
        if any(w <= 0 for w in self.weights):
            raise DomainError("weights must be positive")
        if self.budget < 0:
            raise DomainError("budget must be non-negative")
        for b in self.profile:
            if b.m != m:
                raise DomainError("ballot universe differs from the election's")

    @property
    def m(self) -> int:
        return len(self.objects)

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def is_unitary(self) -> bool:
        return all(w == 1 for w in self.weights)

    def weight(self, subset: Iterable[int]) -> Fraction:
        return sum((self.weights[o] for o in subset), Fraction(0))

    def is_feasible(self, subset: Iterable[int]) -> bool:
        return self.weight(subset) <= self.budget

    def index(self, name) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise DomainError(f"unknown object {name!r}") from None

    def names(self, subset: Iterable[int]) -> list:
        return [self.objects[o] for o in sorted(subset)]

    def with_profile(self, profile: Profile) -> "ElectionInstance":
        return ElectionInstance(self.objects, self.weights, self.budget, profile)


def is_unitary(weights: Sequence) -> bool:
    return all(to_fraction(w) == 1 for w in weights)


def _check_object(o, m):
    if not isinstance(o, int) or isinstance(o, bool) or not 0 <= o < m:
        raise DomainError(f"object {o!r} outside universe of size {m}")


def sincere_utility(ballot: Ballot, subset: Iterable[int]) -> Fraction:
    """Sum of the ballot's values over ``subset``.

    For approval ballots this is the size of the overlap.
    """
    total = Fraction(0)
    seen = set()
    for o in subset:
        _check_object(o, ballot.m)
        if o in seen:
            continue
        seen.add(o)
        total += ballot.values[o]
    return total


def weighted_utility(ballot: Ballot, subset: Iterable[int], weights: Sequence) -> Fraction:
    """Total weight of the objects that are both selected and approved."""
    if ballot.kind != APPROVAL:
        raise BallotKindError("weighted utility is defined for approval ballots only")
    if len(weights) != ballot.m:
        raise DomainError("one weight per object is required")
    total = Fraction(0)
    for o in set(subset):
        _check_object(o, ballot.m)
        if ballot.values[o]:
            total += to_fraction(weights[o])
    return total


# -- JSON round trip -------------------------------------------------------


def election_to_dict(inst: ElectionInstance) -> dict:
    kind = inst.profile.kind or APPROVAL
    ballots = []
    for b in inst.profile:
        if b.kind == APPROVAL:
            ballots.append(inst.names(b.approved))
        elif b.kind == RANKING:
            order = sorted(range(inst.m), key=lambda o: b.values[o])
            ballots.append([inst.objects[o] for o in order])
        else:
            ballots.append([fraction_to_json(v) for v in b.values])
    return {
        "objects": list(inst.objects),
        "weights": [fraction_to_json(w) for w in inst.weights],
        "budget": fraction_to_json(inst.budget),
        "ballot_kind": kind,
        "ballots": ballots,
    }


def election_from_dict(data: dict) -> ElectionInstance:
    try:
        objects = [str(o) for o in data["objects"]]
        m = len(objects)
        weights = data.get("weights", [1] * m)
        budget = data["budget"]
        kind = data.get("ballot_kind", APPROVAL)
        raw = data.get("ballots", [])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed election document: {exc}") from exc
    if kind not in BALLOT_KINDS:
        raise BallotKindError(f"unknown ballot kind {kind!r}")
    pos = {name: i for i, name in enumerate(objects)}

    def lookup(name):
        if name not in pos:
            raise DomainError(f"unknown object {name!r}")
        return pos[name]

    ballots = []
    for row in raw:
        if kind == APPROVAL:
            ballots.append(Ballot.approval([lookup(str(x)) for x in row], m))
        elif kind == RANKING:
            idx = [lookup(str(x)) for x in row]
            if sorted(idx) != list(range(m)):
                raise DomainError("a ranking ballot must list every object once")
            ranks = [0] * m
            for r, o in enumerate(idx):
                ranks[o] = r + 1
            ballots.append(Ballot.ranking(ranks))
        else:
            if len(row) != m:
                raise DomainError("a value ballot needs one value per object")
            ballots.append(Ballot.value([to_fraction(x) for x in row]))
    return ElectionInstance(tuple(objects), tuple(weights), budget, Profile(tuple(ballots)))


def load_election(path) -> ElectionInstance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON: {exc}") from exc
    return election_from_dict(data)


def dump_election(inst: ElectionInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(election_to_dict(inst), fh, indent=2)
        fh.write("\n")
