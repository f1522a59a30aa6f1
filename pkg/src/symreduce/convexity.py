"""Hessian form g_f(x, xt) = xt^T D^2 f(x) xt and the kappa(g_f) bounds.

A polynomial is convex iff its Hessian form is globally non-negative, and the
Hessian form of a k-symmetric polynomial is 2k-symmetric.  The form lives on
an (n, 2k) array: columns 1..k hold x, columns k+1..2k hold xt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence

from .bounds import (BoundNotApplicable, KappaBound, Method, Simplex, _require_symmetric, clamp,
                     fit_simplex, fit_simplex_exact)
from .multisym import ExponentTuple, _check_weights, exponent_profile, weighted_degree
from .poly import MINUS_INFINITY, Mono, Polynomial, format_polynomial


@dataclass(frozen=True)
class HessianForm:
    g: Polynomial
    source: Polynomial

    @property
    def k(self) -> int:
        return self.source.k

    def to_text(self) -> str:
        n, k = self.source.shape
        return (f"# hessian form of a polynomial with n={n} k={k}; "
                f"columns 1..{k} = x, {k + 1}..{2 * k} = xt\n" + format_polynomial(self.g))


def hessian_form(f: Polynomial) -> HessianForm:
    n, k = f.shape
    k2 = 2 * k
    out: Dict[Mono, Fraction] = {}

    def xvar(v):
        return (v // k) * k2 + v % k

    def tvar(v):
        return (v // k) * k2 + k + v % k

    for m, c in f.items():
        for ia, (a, ea) in enumerate(m):
            for ib, (b, eb) in enumerate(m):
                if ia == ib:
                    if ea < 2:
                        continue
                    coeff = c * ea * (ea - 1)
                    rest = {xvar(v): e for v, e in m}
                    rest[xvar(a)] -= 2
                    rest[tvar(a)] = 2
                else:
                    coeff = c * ea * eb
                    rest = {xvar(v): e for v, e in m}
                    rest[xvar(a)] -= 1
                    rest[xvar(b)] -= 1
                    rest[tvar(a)] = rest.get(tvar(a), 0) + 1
                    rest[tvar(b)] = rest.get(tvar(b), 0) + 1
                mono = tuple(sorted((v, e) for v, e in rest.items() if e))
                s = out.get(mono, 0) + coeff
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
    return HessianForm(Polynomial._raw(n, k2, out), f)


def hessian_matrix(f: Polynomial) -> List[List[Polynomial]]:
    n, k = f.shape
    grads = [f.partial(v // k + 1, v % k + 1) for v in range(n * k)]
    return [[grads[a].partial(b // k + 1, b % k + 1) for b in range(n * k)] for a in range(n * k)]


def _tau_images(profile, k: int):
    for i in range(k):
        for j in range(k):
            shift = [0] * k
            shift[i] += 1
            shift[j] += 1
            for alpha in profile:
                moved = tuple(a - s for a, s in zip(alpha, shift))
                if min(moved) >= 0:
                    yield moved, tuple(shift)


def h_profile(f: Polynomial) -> FrozenSet[ExponentTuple]:
    """H_f: union of E_f - e_i - e_j over column pairs, cut to the orthant."""
    _require_symmetric(f)
    return frozenset(moved for moved, _ in _tau_images(exponent_profile(f), f.k))


def e_gf_superset(f: Polynomial) -> FrozenSet[ExponentTuple]:
    """Union over (i, j) of (tau_ij(E_f) in the orthant) x {e_i + e_j}."""
    return frozenset(moved + shift for moved, shift in _tau_images(exponent_profile(f), f.k))


def e_gf_profile(f: Polynomial) -> FrozenSet[ExponentTuple]:
    """Exact exponent profile of the constructed Hessian form (length 2k)."""
    _require_symmetric(f)
    return exponent_profile(hessian_form(f).g)


# ---------------------------------------------------------------------------
# kappa(g_f) bounds

def kappa_hessian_simplex(f: Polynomial, a) -> KappaBound:
    _require_symmetric(f)
    simplex = a if isinstance(a, Simplex) else Simplex(tuple(a))
    if simplex.k != f.k:
        raise ValueError(f"simplex has {simplex.k} intercepts, polynomial has k={f.k}")
    if any(x < 1 for x in simplex.a):
        raise BoundNotApplicable("all intercepts must be at least 1")
    if not simplex.encloses(h_profile(f)):
        raise BoundNotApplicable("the simplex does not enclose H_f")
    value = 3 ** f.k * math.prod(math.floor(2 * x) for x in simplex.a)
    return clamp(value, f.n, Method.HESSIAN_SIMPLEX, simplex)


def fit_h_simplex(f: Polynomial) -> Simplex:
    """Simplex over H_f minimising prod(floor(2 a_j)) subject to a_j >= 1."""
    doubled = [tuple(2 * x for x in alpha) for alpha in h_profile(f)]
    b = fit_simplex_exact(doubled, min_floor=2)
    return Simplex(tuple(x / 2 for x in b.a))


def kappa_hessian_refined(f: Polynomial, weight_cap: int = 8, min_intercept: int = 1) -> KappaBound:
    """Fit a 2k-simplex directly to the exact E_{g_f}.

    ``min_intercept=1`` lets a simplex intercept fall in [1, 2), which is how
    the 48 for the two-column worked example arises; ``min_intercept=2`` keeps
    every intercept >= 2.
    """
    _require_symmetric(f)
    prof = e_gf_profile(f)
    if not prof:
        raise BoundNotApplicable("Hessian form is zero (f has degree < 2)")
    seed = fit_simplex(prof, weight_cap).objective()
    simplex = fit_simplex_exact(prof, min_floor=min_intercept, upper=seed)
    notes = "" if min(simplex.floors()) >= 2 else "uses an intercept below 2"
    return clamp(simplex.objective(), f.n, Method.HESSIAN_REFINED, simplex, notes)


def kappa_hessian_weighted(f: Polynomial, w: Sequence[int]) -> KappaBound:
    _require_symmetric(f)
    w = _check_weights(w, f.k)
    d = weighted_degree(f, w)
    need = 2 * min(w) + max(w)
    if d == MINUS_INFINITY or d < need:
        raise BoundNotApplicable(f"weighted degree {d} < 2*min(w) + max(w) = {need}")
    dt = d - 2 * min(w)
    value = 3 ** f.k * math.prod((2 * dt) // x for x in w)
    return clamp(value, f.n, Method.HESSIAN_WEIGHTED, Simplex.from_weights(w, d))


def kappa_hessian_degree(f: Polynomial) -> KappaBound:
    _require_symmetric(f)
    d = f.degree()
    if d == MINUS_INFINITY or d < 3:
        raise BoundNotApplicable(f"degree {d} < 3; quadratics are handled directly")
    return clamp((6 * (d - 2)) ** f.k, f.n, Method.HESSIAN_DEGREE, d)


def hessian_bounds(f: Polynomial, weight_cap: int = 8, min_intercept: int = 1) -> List[KappaBound]:
    out = []
    makers = [lambda: kappa_hessian_refined(f, weight_cap, min_intercept),
              lambda: kappa_hessian_simplex(f, fit_h_simplex(f)),
              lambda: kappa_hessian_weighted(f, (1,) * f.k),
              lambda: kappa_hessian_degree(f)]
    for make in makers:
        try:
            out.append(make())
        except BoundNotApplicable:
            pass
    return out


def best_hessian_kappa(f: Polynomial, weight_cap: int = 8, min_intercept: int = 1) -> KappaBound:
    bounds = hessian_bounds(f, weight_cap, min_intercept)
    if not bounds:
        raise BoundNotApplicable("no kappa(g_f) bound applies (degree < 2)")
    return min(bounds, key=lambda b: b.value)


# ---------------------------------------------------------------------------
# quadratic and affine base cases

def is_psd(matrix: Sequence[Sequence[Fraction]]) -> bool:
    """Exact positive-semidefiniteness by symmetric elimination."""
    a = [[Fraction(x) for x in row] for row in matrix]
    size = len(a)
    for i in range(size):
        p = a[i][i]
        if p < 0:
            return False
        if p == 0:
            if any(a[i][j] != 0 for j in range(i + 1, size)):
                return False
            continue
        for r in range(i + 1, size):
            if a[r][i] == 0:
                continue
            factor = a[r][i] / p
            for c in range(i, size):
                a[r][c] -= factor * a[i][c]
    return True


def quadratic_is_convex(f: Polynomial) -> bool:
    """Degree <= 2: the Hessian is constant, so convexity is one PSD test."""
    if f.degree() > 2:
        raise ValueError("not a quadratic")
    hess = hessian_matrix(f)
    return is_psd([[h.constant_term() for h in row] for row in hess])


def convex_kappa_one_check(f: Polynomial) -> Polynomial:
    """Restriction of f to the diagonal A_1, a polynomial in Y_1..Y_k (shape (1, k)).

    Valid for deciding non-negativity of f once f is known to be convex.
    """
    _require_symmetric(f)
    from .reduce import restrict
    return restrict(f, (f.n,)).q
