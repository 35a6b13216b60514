"""Score functions: tally approval ballots, score with a matrix, pick the top W.

``M[i][j]`` is the contribution of one vote for object ``j`` to the score of
object ``i``, so the score vector of a tally ``e`` is ``M @ e``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import BallotKindError, DomainError
from .model import APPROVAL, Profile, fraction_to_json, to_fraction


@dataclass(frozen=True)
class ScoreMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.entries)
        m = len(rows)
        if m < 1 or any(len(r) != m for r in rows):
            raise DomainError("a score matrix must be square and non-empty")
        object.__setattr__(self, "entries", rows)

    @property
    def m(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def column(self, j):
        return tuple(r[j] for r in self.entries)

    def flat(self) -> tuple:
        return tuple(v for r in self.entries for v in r)

    def to_float(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.entries])

    @classmethod
    def identity(cls, m: int) -> "ScoreMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(m)) for i in range(m)))

    @classmethod
    def diagonal(cls, diag: Sequence) -> "ScoreMatrix":
        m = len(diag)
        return cls(tuple(tuple(diag[i] if i == j else 0 for j in range(m)) for i in range(m)))


@dataclass(frozen=True)
class TieBreak:
    """Strict priority order over objects; earlier entries win ties."""

    order: tuple

    def __post_init__(self):
        order = tuple(self.order)
        if sorted(order) != list(range(len(order))):
            raise DomainError("a tie-break must be a permutation of range(m)")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_rank", {o: r for r, o in enumerate(order)})

    @classmethod
    def natural(cls, m: int) -> "TieBreak":
        return cls(tuple(range(m)))

    @property
    def m(self) -> int:
        return len(self.order)

    def rank(self, o: int) -> int:
        return self._rank[o]

    def beats(self, i: int, j: int) -> bool:
        """True when ``i`` is chosen over ``j`` on equal scores."""
        return self._rank[i] < self._rank[j]


@dataclass(frozen=True)
class ScoreFunction:
    matrix: ScoreMatrix
    tiebreak: TieBreak

    def __post_init__(self):
        if not isinstance(self.matrix, ScoreMatrix):
            object.__setattr__(self, "matrix", ScoreMatrix(self.matrix))
        if self.tiebreak is None:
            object.__setattr__(self, "tiebreak", TieBreak.natural(self.matrix.m))
        if self.matrix.m != self.tiebreak.m:
            raise DomainError("matrix and tie-break dimensions differ")

    @classmethod
    def of(cls, entries, tiebreak: Optional[Sequence[int]] = None) -> "ScoreFunction":
        M = entries if isinstance(entries, ScoreMatrix) else ScoreMatrix(entries)
        tb = TieBreak.natural(M.m) if tiebreak is None else TieBreak(tuple(tiebreak))
        return cls(M, tb)

    @property
    def m(self) -> int:
        return self.matrix.m


@dataclass(frozen=True)
class WinningSet:
    winners: frozenset
    scores: tuple
    ranking: tuple  # objects in decreasing score order, ties by tie-break
    ties_at_cut: tuple  # objects sharing the cut score, resolved by the tie-break

    @property
    def value(self) -> Fraction:
        return sum((self.scores[o] for o in self.winners), Fraction(0))


def tally(profile, m: Optional[int] = None) -> tuple:
    """Number of ballots approving each object."""
    ballots = list(profile)
    if m is None:
        if not ballots:
            raise DomainError("the size of the universe is required for an empty profile")
        m = ballots[0].m
    counts = [0] * m
    for b in ballots:
        if b.kind != APPROVAL:
            raise BallotKindError("score functions tally approval ballots only")
        if b.m != m:
            raise DomainError("ballot universe differs from the tally size")
        for o in b.approved:
            counts[o] += 1
    return tuple(counts)


def scores(sf: ScoreFunction, e: Sequence) -> tuple:
    M = sf.matrix if isinstance(sf, ScoreFunction) else sf
    if len(e) != M.m:
        raise DomainError(f"tally of length {len(e)} for a {M.m}x{M.m} matrix")
    e = [to_fraction(x) for x in e]
    return tuple(sum((a * x for a, x in zip(row, e)), Fraction(0)) for row in M.entries)


def rank_objects(sf: ScoreFunction, score_vec) -> list:
    tb = sf.tiebreak
    return sorted(range(sf.m), key=lambda o: (-score_vec[o], tb.rank(o)))


def winners(sf: ScoreFunction, e: Sequence, W: int) -> WinningSet:
    """The ``W`` highest-scoring objects, ties resolved by the tie-break."""
    if not isinstance(W, int) or not 0 <= W <= sf.m:
        raise DomainError(f"W={W!r} outside [0, {sf.m}]")
    s = scores(sf, e)
    order = rank_objects(sf, s)
    chosen = frozenset(order[:W])
    ties = ()
    if 0 < W < sf.m:
        cut = s[order[W - 1]]
        if s[order[W]] == cut:
            ties = tuple(o for o in order if s[o] == cut)
    return WinningSet(chosen, s, tuple(order), ties)


def winner_set(sf: ScoreFunction, e: Sequence, W: int) -> frozenset:
    return winners(sf, e, W).winners


def knapsack_matrix(m: int) -> ScoreFunction:
    """Knapsack voting as a score function: identity matrix, index tie-break."""
    if m < 1:
        raise DomainError("m must be at least 1")
    return ScoreFunction(ScoreMatrix.identity(m), TieBreak.natural(m))


def winners_for_profile(sf: ScoreFunction, profile: Profile, W: int) -> WinningSet:
    return winners(sf, tally(profile, sf.m), W)


# -- matrix CSV and tie-break JSON -----------------------------------------


def matrix_to_csv(M: ScoreMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M.entries:
        w.writerow([fraction_to_json(v) for v in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> ScoreMatrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    return ScoreMatrix(tuple(tuple(to_fraction(c.strip()) for c in r) for r in rows))


def load_matrix(path) -> ScoreMatrix:
    with open(path, newline="") as fh:
        return matrix_from_csv(fh.read())


def dump_matrix(M: ScoreMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(matrix_to_csv(M))


def tiebreak_to_json(tb: TieBreak, names: Sequence[str]) -> list:
    return [names[o] for o in tb.order]


def tiebreak_from_json(data, names: Sequence[str]) -> TieBreak:
    pos = {n: i for i, n in enumerate(names)}
    try:
        return TieBreak(tuple(pos[str(x)] for x in data))
    except KeyError as exc:
        raise DomainError(f"unknown object {exc.args[0]!r} in tie-break") from None


def load_tiebreak(path, names: Sequence[str]) -> TieBreak:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON: {exc}") from exc
    return tiebreak_from_json(data, names)


def default_names(m: int) -> list:
    return [f"o{i + 1}" for i in range(m)]
