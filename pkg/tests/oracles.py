"""Independent reference implementations used to check the library.

Everything here goes through sympy or brute-force enumeration and shares
no code with the package beyond reading a Polynomial's term map.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import sympy as sp


def symbols(n, k, name="x"):
    return [[sp.Symbol(f"{name}_{i}_{j}") for j in range(1, k + 1)] for i in range(1, n + 1)]


def to_sympy(f, syms=None):
    n, k = f.shape
    syms = syms or symbols(n, k)
    flat = [s for row in syms for s in row]
    expr = sp.Integer(0)
    for mono, c in f.items():
        t = sp.Rational(c.numerator, c.denominator)
        for v, e in mono:
            t *= flat[v] ** e
        expr += t
    return sp.expand(expr)


def sympy_terms(expr, n, k, syms=None):
    """Term map {((v, e), ...): Fraction} of a sympy expression."""
    syms = syms or symbols(n, k)
    flat = [s for row in syms for s in row]
    poly = sp.Poly(sp.expand(expr), *flat)
    out = {}
    for exps, c in poly.terms():
        c = sp.Rational(c)
        mono = tuple((v, e) for v, e in enumerate(exps) if e)
        out[mono] = Fraction(int(c.p), int(c.q))
    return {m: c for m, c in out.items() if c}


def power_sum(alpha, n, k):
    x = symbols(n, k)
    return sp.Add(*[sp.Mul(*[x[i][j] ** a for j, a in enumerate(alpha)]) for i in range(n)])


def orbit_sum(expr, n, k):
    """Sum of the distinct images of expr under all n! row permutations."""
    x = symbols(n, k)
    images = set()
    for perm in itertools.permutations(range(n)):
        sub = {x[i][j]: x[perm[i]][j] for i in range(n) for j in range(k)}
        images.add(sp.expand(expr.xreplace(sub)))
    return sp.Add(*images)


def collapse_profile(expr, n, k):
    """E_f by brute force: map each monomial x[i,j] -> Y_j."""
    x = symbols(n, k)
    flat = [s for row in x for s in row]
    poly = sp.Poly(sp.expand(expr), *flat)
    out = set()
    for exps, c in poly.terms():
        if c == 0:
            continue
        col = [0] * k
        for v, e in enumerate(exps):
            col[v % k] += e
        out.add(tuple(col))
    return out


def hessian_form(expr, n, k):
    """xt^T D^2 f xt with the doubled array laid out as (n, 2k)."""
    x2 = symbols(n, 2 * k)
    x = [row[:k] for row in x2]
    xt = [row[k:] for row in x2]
    orig = symbols(n, k)
    expr = expr.xreplace({orig[i][j]: x[i][j] for i in range(n) for j in range(k)})
    flat_x = [s for row in x for s in row]
    flat_t = [s for row in xt for s in row]
    g = sp.Integer(0)
    for a, va in enumerate(flat_x):
        da = sp.diff(expr, va)
        for b, vb in enumerate(flat_x):
            g += flat_t[a] * flat_t[b] * sp.diff(da, vb)
    return sp.expand(g)


def partitions_brute(n, ell):
    """All partitions of n into exactly ell parts, by filtering all nonincreasing tuples."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n, 0, -1), ell):
        if sum(combo) == n:
            out.append(tuple(combo))
    return sorted(set(out), reverse=True)


def min_floor_product_brute(points, min_floor, limit):
    """Smallest prod(floor a_j) over simplices enclosing points, by scanning floor boxes."""
    k = len(next(iter(points)))
    best = None
    for floors in itertools.product(range(min_floor, limit + 1), repeat=k):
        if all(sum(Fraction(p[j], floors[j] + 1) for j in range(k)) < 1 for p in points):
            prod = int(np.prod(floors))
            best = prod if best is None else min(best, prod)
    return best


def weighted_fit_brute(points, cap):
    """Objective of the best integer-weight simplex with intercept inflation, scanning all w."""
    k = len(next(iter(points)))
    best = None
    for w in itertools.product(range(1, cap + 1), repeat=k):
        d = max(sum(a * b for a, b in zip(w, p)) for p in points)
        d = max(d, 2 * max(w))
        obj = int(np.prod([d // x for x in w]))
        if best is None or obj < best[0]:
            best = (obj, w, d)
    return best


def sphere_grid_min_n3(f_num, r, steps=800):
    """Dense grid over the sphere x1^2+x2^2+x3^2 = r in spherical coordinates."""
    rad = np.sqrt(r)
    theta = np.linspace(0, np.pi, steps)
    phi = np.linspace(0, 2 * np.pi, 2 * steps)
    t, p = np.meshgrid(theta, phi)
    x = rad * np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    return float(f_num(x.reshape(-1, 3)).min())


def naive_evaluate(f, x):
    """Term-by-term summation."""
    total = Fraction(0)
    flat = [v for row in x for v in row]
    for mono, c in f.items():
        t = Fraction(c)
        for v, e in mono:
            t *= Fraction(flat[v]) ** e
        total += t
    return total
