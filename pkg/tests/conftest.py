import os
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from symreduce.poly import Polynomial

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polynomials(draw, n=None, k=None, max_terms=5, max_exp=3):
    n = n or draw(st.integers(1, 3))
    k = k or draw(st.integers(1, 2))
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = {}
        for _ in range(draw(st.integers(0, 3))):
            v = draw(st.integers(0, n * k - 1))
            exps[v] = exps.get(v, 0) + draw(st.integers(1, max_exp))
        mono = tuple(sorted(exps.items()))
        terms[mono] = terms.get(mono, 0) + draw(small_rationals)
    return Polynomial(n, k, terms)


def random_point(rng, n, k, lo=-3, hi=3, den=4):
    return [[Fraction(rng.randint(lo * den, hi * den), den) for _ in range(k)] for _ in range(n)]


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import lines
    rows = lines()
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
