import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from generators import example_family, random_power_sum_poly, random_symmetric
from oracles import sphere_grid_min_n3, symbols, to_sympy
from symreduce.bounds import best_kappa
from symreduce.multisym import power_sum
from symreduce.poly import Polynomial, evaluate
from symreduce.verify import (CompiledPoly, CounterexampleAt, NoCounterexampleFound, SphereSpec,
                              check_instances, default_starts, kappa_consistency_experiment,
                              min_on_reduced, min_on_sphere, nonneg_check, substream, worker_count)
from symreduce.reduce import restrict


def close(a, b, tol):
    return abs(a - b) <= tol * (1 + abs(b))


def k1_quartic(rng, n):
    p = lambda a: power_sum((a,), (n, 1))
    coeffs = [rng.randint(-3, 3) for _ in range(5)]
    return (p(4) * coeffs[0] + p(2) ** 2 * coeffs[1] + p(1) ** 4 * coeffs[2]
            + p(1) * p(3) * coeffs[3] + p(1) ** 2 * p(2) * coeffs[4] + p(1) ** 2 - p(2))


# --- evaluator ---------------------------------------------------------------

def test_compiled_value_and_gradient_match_exact_arithmetic():
    rng = random.Random(4)
    nrng = np.random.default_rng(4)
    for _ in range(10):
        n, k = rng.randint(1, 4), rng.randint(1, 2)
        f = random_power_sum_poly(rng, n, k, rng.randint(1, 5)) + Fraction(1, 3)
        comp = CompiledPoly(f)
        x = nrng.standard_normal((3, n * k))
        val, grad = comp.value_grad(x)
        assert np.allclose(comp.value(x), val)
        for b in range(3):
            pt = x[b].reshape(n, k).tolist()
            assert close(val[b], float(evaluate(f, pt)), 1e-12)
            for v in range(n * k):
                exact = float(evaluate(f.partial(v // k + 1, v % k + 1), pt))
                assert close(grad[b, v], exact, 1e-10)


def test_compiled_constant_and_zero():
    comp = CompiledPoly(Polynomial.constant(5, 2, 1))
    assert np.allclose(comp.value(np.zeros((2, 2))), 5)
    val, grad = CompiledPoly(Polynomial.zero(2, 1)).value_grad(np.ones((1, 2)))
    assert val[0] == 0 and not grad.any()


# --- sphere minimization ---------------------------------------------------------

def test_trivial_minima():
    assert close(min_on_sphere(power_sum((2,), (4, 1)), 3).value, 3, 1e-12)
    rep = min_on_sphere(Polynomial.var(1, 1, 2, 1), 4)
    assert close(rep.value, -2, 1e-9)
    assert close(min_on_sphere(power_sum((1,), (3, 1)), 3).value, -3, 1e-9)
    assert min_on_sphere(Polynomial.constant(7, 2, 2), 1).value == 7


def test_min_on_sphere_against_dense_grid_n3():
    rng = random.Random(10)
    x = symbols(3, 1)
    flat = [r[0] for r in x]
    for _ in range(6):
        f = random_symmetric(rng, 3, 1, 4, terms=3)
        num = sp.lambdify([flat], to_sympy(f), "numpy")
        f_num = lambda pts: np.broadcast_to(num(pts.T), (pts.shape[0],))
        for r in (1, 4):
            grid = sphere_grid_min_n3(f_num, r)
            got = min_on_sphere(f, r, starts=64, seed=3).value
            assert got <= grid + 1e-9
            assert close(got, grid, 1e-4)


def test_min_on_sphere_is_deterministic_and_feasible():
    f = example_family(3)
    a = min_on_sphere(f, Fraction(9, 4), starts=32, seed=11)
    b = min_on_sphere(f, Fraction(9, 4), starts=32, seed=11)
    assert a.value == b.value and np.array_equal(a.argmin, b.argmin)
    assert abs(float((a.argmin ** 2).sum()) - 2.25) <= 1e-10 * 2.25
    assert a.argmin.shape == (3, 2)
    assert a.as_json()["starts"] == 32


def test_substreams_differ_by_item_and_seed():
    a = substream(0, 1, 2).standard_normal(4)
    assert np.array_equal(a, substream(0, 1, 2).standard_normal(4))
    assert not np.array_equal(a, substream(0, 1, 3).standard_normal(4))
    assert not np.array_equal(a, substream(1, 1, 2).standard_normal(4))


def test_sphere_spec_validation():
    assert SphereSpec(Fraction(1, 2)).radius_sq == Fraction(1, 2)
    with pytest.raises(ValueError):
        SphereSpec(0)
    with pytest.raises(ValueError):
        min_on_sphere(power_sum((2,), (2, 1)), 1, starts=0)


def test_default_starts_and_workers(monkeypatch):
    assert default_starts(12) == 64 and default_starts(13) == 256
    monkeypatch.setenv("MULTISYM_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("MULTISYM_THREADS", "junk")
    assert worker_count() >= 1


# --- reduced minimization -----------------------------------------------------------

def test_min_on_reduced_identity_level_agrees_with_full():
    f = example_family(3)
    full = min_on_sphere(f, 1, starts=64, seed=2)
    red = min_on_reduced(f, 3, 1, starts=64, seed=2)
    assert close(red.value, full.value, 1e-6)
    assert red.argmin.shape == (3, 2)
    assert abs(float((red.argmin ** 2).sum()) - 1) <= 1e-10


def test_convex_polynomial_can_have_sphere_minimum_off_the_diagonal():
    # p1^2 is convex but vanishes on the sphere away from the diagonal, where it equals n*r
    f = power_sum((1,), (3, 1)) ** 2
    assert close(min_on_sphere(f, 1, seed=0).value, 0, 1e-9)
    assert close(min_on_reduced(f, 1, 1, seed=0).value, 3, 1e-12)


def test_min_on_reduced_level_one_when_the_sphere_minimum_is_diagonal():
    # on a sphere p2 is constant, so f is an increasing function of p1 there
    n = 5
    p1, p2 = power_sum((1,), (n, 1)), power_sum((2,), (n, 1))
    f = p2 ** 2 + p2 * 2 + p1 * 3
    for r in (1, 4):
        full = min_on_sphere(f, r, seed=1)
        red = min_on_reduced(f, 1, r, seed=1)
        assert close(red.value, full.value, 1e-6)
        assert red.lam == (5,)


def test_convex_global_minimum_is_attained_on_the_diagonal():
    from scipy.optimize import minimize
    n = 4
    p1, p2 = power_sum((1,), (n, 1)), power_sum((2,), (n, 1))
    f = (p2 + p1 + Fraction(n, 4)) ** 2 + p1 ** 2 - p1 * 5 + p2
    comp = CompiledPoly(f)
    fun = lambda x: (lambda v, g: (float(v[0]), g[0]))(*comp.value_grad(x[None, :]))
    full = minimize(fun, np.full(n, 0.3) + np.arange(n) * 0.1, jac=True, method="BFGS", tol=1e-14)
    diag = CompiledPoly(restrict(f, (n,)).q)
    line = minimize(lambda y: (lambda v, g: (float(v[0]), g[0]))(*diag.value_grad(y[None, :])),
                    np.zeros(1), jac=True, method="BFGS", tol=1e-14)
    assert close(full.fun, line.fun, 1e-8)
    assert np.ptp(full.x) < 1e-5


def test_random_k1_quartic_level_two_agrees():
    rng = random.Random(77)
    for _ in range(4):
        f = k1_quartic(rng, 5)
        full = min_on_sphere(f, 1, seed=5)
        red = min_on_reduced(f, 2, 1, seed=5)
        assert close(red.value, full.value, 1e-6)


def test_dominance_and_monotonicity_in_m():
    rng = random.Random(12)
    tol = 1e-6
    for _ in range(3):
        f = random_symmetric(rng, 4, 1, 5, terms=4)
        full = min_on_sphere(f, 2, starts=32, seed=0).value
        levels = [min_on_reduced(f, m, 2, starts=32, seed=0).value for m in range(1, 5)]
        for v in levels:
            assert v >= full - tol * (1 + abs(full))
        for a, b in zip(levels, levels[1:]):
            assert b <= a + tol * (1 + abs(a))


def test_min_on_reduced_errors():
    with pytest.raises(ValueError):
        min_on_reduced(example_family(3), 4, 1)
    with pytest.raises(ValueError):
        min_on_reduced(example_family(3), 0, 1)


# --- consistency experiment ------------------------------------------------------------

def test_consistency_clamped_case_is_trivial():
    f = example_family(4)
    report = kappa_consistency_experiment(f, best_kappa(f, 6), [1], starts=32, seed=0)
    assert report.m == 4 and report.passed
    assert len(report.lines()) == 2 and report.lines()[1].endswith("PASS")
    assert report.as_json()["passed"] is True


def test_consistency_random_two_symmetric_passes():
    rng = random.Random(8)
    f = random_symmetric(rng, 6, 2, 4, terms=3)
    b = best_kappa(f)
    report = kappa_consistency_experiment(f, b, [1, 4, 9], starts=64, seed=1)
    assert report.passed, report.lines()


def test_consistency_k1_quartic_level_two():
    f = k1_quartic(random.Random(3), 6)
    report = kappa_consistency_experiment(f, 2, [1, 4, 9], seed=0)
    assert report.passed, report.lines()


def test_consistency_flags_an_undersized_level():
    # on the unit sphere -p_4 is smallest at a coordinate vector, which has two distinct row values
    f = power_sum((4,), (5, 1)) * -1
    report = kappa_consistency_experiment(f, 1, [1], starts=64, seed=0)
    assert not report.passed
    assert report.lines()[1].endswith("FAIL")


# --- non-negativity ---------------------------------------------------------------------

def test_nonneg_check_examples():
    q = power_sum((2,), (3, 1))
    assert isinstance(nonneg_check(q, [1, 4]), NoCounterexampleFound)
    bad = Polynomial.var(1, 1, 3, 1) ** 2 * -1
    verdict = nonneg_check(bad, [1])
    assert isinstance(verdict, CounterexampleAt)
    assert verdict.confirmed and verdict.exact_value < 0
    assert evaluate(bad, [list(r) for r in verdict.point]) == verdict.exact_value
    assert "heuristic" in str(nonneg_check(q, [1]))


def test_nonneg_check_includes_the_origin():
    verdict = nonneg_check(power_sum((2,), (2, 1)) - 1, [4])
    assert isinstance(verdict, CounterexampleAt) and verdict.exact_value == -1


def test_nonneg_check_on_weighted_spheres():
    # q = y1^2 - y2^2 is indefinite whatever the weights
    q = Polynomial.var(1, 1, 2, 1) ** 2 - Polynomial.var(2, 1, 2, 1) ** 2
    verdict = nonneg_check(q, [1], weights=[3, 1])
    assert isinstance(verdict, CounterexampleAt) and verdict.confirmed
    y = [float(r[0]) for r in verdict.point]
    assert math.isclose(3 * y[0] ** 2 + y[1] ** 2, 1, rel_tol=1e-9)


def test_check_instances_on_reduced_squares():
    f = power_sum((2,), (4, 1)) * 2 + power_sum((1,), (4, 1)) ** 2
    insts = [restrict(f, lam) for lam in [(4,), (3, 1), (2, 2)]]
    results = check_instances(insts, [1, 4], starts=16, seed=0)
    assert [i.lam for i, _ in results] == [(4,), (3, 1), (2, 2)]
    assert all(isinstance(v, NoCounterexampleFound) for _, v in results)
