"""Score voting: welfare solvers, score-function winners, strategyproofness
checks, a brute-force manipulation oracle and the closest-strategyproof
projection."""

from .model import Ballot, ElectionInstance, Profile, sincere_utility, weighted_utility
from .score import ScoreFunction, ScoreMatrix, TieBreak, knapsack_matrix, scores, tally, winners

__all__ = [
    "Ballot",
    "ElectionInstance",
    "Profile",
    "ScoreFunction",
    "ScoreMatrix",
    "TieBreak",
    "knapsack_matrix",
    "scores",
    "sincere_utility",
    "tally",
    "weighted_utility",
    "winners",
]
