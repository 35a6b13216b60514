import os
import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def fractions(lo=-6, hi=6, max_den=3):
    return st.builds(Fraction, st.integers(lo, hi), st.integers(1, max_den))


@st.composite
def matrices(draw, m=None, lo=-6, hi=6):
    m = draw(st.integers(1, 4)) if m is None else m
    return tuple(tuple(draw(fractions(lo, hi)) for _ in range(m)) for _ in range(m))


@st.composite
def permutations_of(draw, m):
    return tuple(draw(st.permutations(list(range(m)))))


# acceptance lines, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
