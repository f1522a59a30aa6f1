import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polynomials, random_point
from oracles import naive_evaluate, sympy_terms, to_sympy
from symreduce.poly import (MINUS_INFINITY, PolyFormatError, Polynomial, ShapeError, TermFormatCache,
                            add, degree, evaluate, format_polynomial, mul, parse_polynomial, partial)


def x(i, j, n=2, k=2):
    return Polynomial.var(i, j, n, k)


def test_add_identity_and_inverse():
    f = x(1, 1) * 3 + x(2, 2) ** 2
    assert add(f, Polynomial.zero(2, 2)) == f
    assert (f + (-f)).is_zero()
    assert add(x(1, 1), x(1, 1)) == x(1, 1) * 2


def test_mul_examples():
    f = x(1, 2) - 7
    assert mul(f, Polynomial.constant(1, 2, 2)) == f
    a, b = Polynomial.var(1, 1, 2, 1), Polynomial.var(2, 1, 2, 1)
    assert (a + b) ** 2 == a ** 2 + a * b * 2 + b ** 2


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        add(Polynomial.var(1, 1, 2, 1), Polynomial.var(1, 1, 3, 1))
    with pytest.raises(ShapeError):
        Polynomial.var(3, 1, 2, 1)
    with pytest.raises(ShapeError):
        evaluate(Polynomial.var(1, 1, 2, 1), [[1], [2], [3]])


def test_no_zero_coefficients_stored():
    f = Polynomial(1, 1, {((0, 1),): 0, (): Fraction(2)})
    assert len(f) == 1
    assert all(c != 0 for c in f.terms.values())


def test_mul_matches_evaluation_at_random_points():
    rng = random.Random(3)
    for _ in range(5):
        f = sum((x(rng.randint(1, 2), rng.randint(1, 2)) ** rng.randint(0, 3) * rng.randint(-3, 3)
                 for _ in range(4)), Polynomial.zero(2, 2))
        g = sum((x(rng.randint(1, 2), rng.randint(1, 2)) ** rng.randint(0, 3) * rng.randint(-3, 3)
                 for _ in range(4)), Polynomial.zero(2, 2))
        for _ in range(20):
            pt = random_point(rng, 2, 2)
            assert evaluate(mul(f, g), pt) == evaluate(f, pt) * evaluate(g, pt)


@given(polynomials(n=2, k=2), polynomials(n=2, k=2))
def test_arithmetic_matches_sympy(f, g):
    assert (f * g).terms == sympy_terms(to_sympy(f) * to_sympy(g), 2, 2)
    assert (f + g).terms == sympy_terms(to_sympy(f) + to_sympy(g), 2, 2)


@given(polynomials(n=2, k=1), polynomials(n=2, k=1), polynomials(n=2, k=1))
def test_ring_axioms_by_evaluation(f, g, h):
    rng = random.Random(0)
    pt = random_point(rng, 2, 1)
    ev = lambda p: evaluate(p, pt)
    assert ev((f * g) * h) == ev(f * (g * h))
    assert ev(f * g) == ev(g * f)
    assert ev(f * (g + h)) == ev(f * g + f * h)
    assert (f * g) == (g * f)


def test_partial_examples():
    f = Polynomial.var(1, 1, 2, 1) ** 3
    assert partial(f, (1, 1)) == Polynomial.var(1, 1, 2, 1) ** 2 * 3
    assert partial(f, (2, 1)).is_zero()


@given(polynomials(n=2, k=2), polynomials(n=2, k=2), st.integers(1, 2), st.integers(1, 2))
def test_partial_is_linear_and_obeys_product_rule(f, g, i, j):
    d = lambda p: partial(p, (i, j))
    assert d(f + g) == d(f) + d(g)
    assert d(f * g) == d(f) * g + f * d(g)
    assert d(f * 3) == d(f) * 3


def test_partial_against_finite_differences():
    rng = random.Random(11)
    n, k = 2, 2
    for _ in range(10):
        f = Polynomial.zero(n, k)
        for _ in range(5):
            f = f + x(rng.randint(1, 2), rng.randint(1, 2)) ** rng.randint(0, 4) * x(1, 2) * rng.randint(-3, 3)
        pt = [[rng.uniform(-1, 1) for _ in range(k)] for _ in range(n)]
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)]:
            h = 1e-5
            up = [row[:] for row in pt]
            dn = [row[:] for row in pt]
            up[i - 1][j - 1] += h
            dn[i - 1][j - 1] -= h
            fd = (evaluate(f, up) - evaluate(f, dn)) / (2 * h)
            assert abs(fd - evaluate(partial(f, (i, j)), pt)) <= 1e-6 * (1 + abs(fd))


def test_partial_exact_for_quadratics():
    f = x(1, 1) ** 2 * 3 + x(1, 1) * x(2, 2) - x(2, 1) * 5
    pt = [[Fraction(1, 3), Fraction(2)], [Fraction(-1, 2), Fraction(5, 7)]]
    h = Fraction(1, 10)
    up = [row[:] for row in pt]
    dn = [row[:] for row in pt]
    up[0][0] += h
    dn[0][0] -= h
    assert (evaluate(f, up) - evaluate(f, dn)) / (2 * h) == evaluate(partial(f, (1, 1)), pt)


def test_evaluate_examples():
    assert evaluate(Polynomial.constant(Fraction(5, 3), 2, 2), [[1, 2], [3, 4]]) == Fraction(5, 3)
    f = Polynomial.var(1, 1, 1, 2) * Polynomial.var(1, 2, 1, 2)
    assert evaluate(f, [[2, 3]]) == 6
    assert isinstance(evaluate(f, [[2.0, 3]]), float)


@given(polynomials())
def test_evaluate_matches_naive_summation(f):
    rng = random.Random(1)
    pt = random_point(rng, f.n, f.k)
    assert evaluate(f, pt) == naive_evaluate(f, pt)


def test_degree():
    assert degree(Polynomial.zero(2, 2)) == MINUS_INFINITY
    assert degree(x(1, 1) ** 2 * x(2, 2)) == 3
    assert degree(Polynomial.constant(4, 1, 1)) == 0


@given(polynomials())
def test_serialization_round_trip(f):
    text = format_polynomial(f)
    g = parse_polynomial(text)
    assert g == f
    assert format_polynomial(g) == text


@given(polynomials(max_exp=40), polynomials(max_exp=40))
def test_cached_formatting_matches_plain(f, g):
    cache = TermFormatCache(f.k)
    for h in (f, g, f):
        assert format_polynomial(h, cache) == format_polynomial(h)


def test_serialization_format():
    f = x(1, 1) ** 2 * x(2, 2) * Fraction(1, 2) + x(1, 2) * 3 - 1
    assert format_polynomial(f) == "poly n=2 k=2\n1/2 x[1,1]^2 x[2,2]\n3 x[1,2]\n-1\n"
    assert format_polynomial(Polynomial.zero(3, 1)) == "poly n=3 k=1\n0\n"
    assert parse_polynomial("poly n=3 k=1\n0\n").is_zero()
    assert parse_polynomial("# comment\npoly n=1 k=1\n2 x[1,1]^1\n") == Polynomial.var(1, 1, 1, 1) * 2


def test_canonical_order_is_graded_lex():
    # higher total degree first, then lex on the row-major exponent vector
    f = x(2, 2) ** 3 + x(1, 1) * x(2, 2) ** 2 + x(1, 1) + x(1, 2)
    lines = format_polynomial(f).splitlines()[1:]
    assert lines == ["1 x[1,1] x[2,2]^2", "1 x[2,2]^3", "1 x[1,1]", "1 x[1,2]"]


@pytest.mark.parametrize("text", ["poly n=2\n1 x[1,1]", "poly n=1 k=1\nabc x[1,1]",
                                  "poly n=1 k=1\n1 x[2,1]", "poly n=1 k=1\n1 y[1,1]", ""])
def test_parse_errors(text):
    with pytest.raises(PolyFormatError):
        parse_polynomial(text)


def test_polynomials_are_hashable_values():
    f = x(1, 1) + 1
    assert hash(f) == hash(Polynomial.var(1, 1, 2, 2) + 1)
    assert {f: 1}[x(1, 1) + 1] == 1
