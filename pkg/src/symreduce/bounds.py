"""Upper bounds on kappa(f), the number of distinct rows needed to see sphere minima.

Every bound is clamped to ``n``: a point has at most n distinct rows, so
kappa(f) <= n holds trivially.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .multisym import (ExponentTuple, NotSymmetricError, _check_weights, exponent_profile,
                       is_k_symmetric, weighted_degree)
from .poly import MINUS_INFINITY, Polynomial


class BoundNotApplicable(ValueError):
    """The hypotheses of a bound do not hold for this input."""


class Method(str, enum.Enum):
    WEIGHTED_DEGREE = "WeightedDegree"
    SIMPLEX_FIT = "SimplexFit"
    SIMPLEX_EXACT = "SimplexExact"
    DEGREE_POWER = "DegreePower"
    COLUMN_DEGREES = "ColumnDegrees"
    HALF_DEGREE_K1 = "HalfDegreeK1"
    AFFINE = "Affine"
    # bounds on kappa(g_f) for the Hessian form
    HESSIAN_SIMPLEX = "HessianSimplex"
    HESSIAN_REFINED = "HessianRefined"
    HESSIAN_WEIGHTED = "HessianWeighted"
    HESSIAN_DEGREE = "HessianDegree"


@dataclass(frozen=True)
class Simplex:
    """conv(0, a_1 e_1, ..., a_k e_k); ``weights``/``degree`` record how it was fitted."""

    a: Tuple[Fraction, ...]
    weights: Optional[Tuple[int, ...]] = None
    degree: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(Fraction(x) for x in self.a))
        if any(x <= 0 for x in self.a):
            raise ValueError("simplex intercepts must be positive")

    @classmethod
    def from_weights(cls, w: Sequence[int], d: int) -> "Simplex":
        return cls(tuple(Fraction(d, x) for x in w), tuple(w), d)

    @property
    def k(self) -> int:
        return len(self.a)

    def contains(self, alpha: Sequence[int]) -> bool:
        if any(x < 0 for x in alpha):
            return False
        return sum(Fraction(x) / aj for x, aj in zip(alpha, self.a)) <= 1

    def encloses(self, points: Iterable[Sequence[int]]) -> bool:
        return all(self.contains(p) for p in points)

    def floors(self) -> Tuple[int, ...]:
        return tuple(math.floor(x) for x in self.a)

    def objective(self) -> int:
        """Lattice points in [0, a_1 - 1] x ... x [0, a_k - 1]."""
        return math.prod(self.floors())

    def as_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"a": [str(x) for x in self.a]}
        if self.weights is not None:
            out["weights"] = list(self.weights)
            out["degree"] = self.degree
        return out


@dataclass(frozen=True)
class KappaBound:
    value: int
    method: Method
    witness: Any = None
    n_clamped: bool = False
    raw_value: int = 0
    notes: str = ""

    def as_json(self) -> Dict[str, Any]:
        w = self.witness
        if isinstance(w, Simplex):
            w = w.as_json()
        elif isinstance(w, tuple):
            w = list(w)
        out = {"value": self.value, "method": self.method.value, "witness": w,
               "n_clamped": self.n_clamped, "raw_value": self.raw_value}
        if self.notes:
            out["notes"] = self.notes
        return out


def clamp(value: int, n: int, method: Method, witness: Any = None, notes: str = "") -> KappaBound:
    value = int(value)
    return KappaBound(min(value, n), method, witness, value > n, value, notes)


def _require_symmetric(f: Polynomial) -> None:
    if not is_k_symmetric(f):
        raise NotSymmetricError("kappa bounds need a k-symmetric polynomial")


# ---------------------------------------------------------------------------
# bounds on kappa(f)

def kappa_weighted(f: Polynomial, w: Sequence[int]) -> KappaBound:
    _require_symmetric(f)
    w = _check_weights(w, f.k)
    d = weighted_degree(f, w)
    if d == MINUS_INFINITY or d < 2 * max(w):
        raise BoundNotApplicable(f"weighted degree {d} is below 2*max(w) = {2 * max(w)}")
    return clamp(math.prod(d // x for x in w), f.n, Method.WEIGHTED_DEGREE,
                 Simplex.from_weights(w, d))


def kappa_simplex(f: Polynomial, a) -> KappaBound:
    _require_symmetric(f)
    simplex = a if isinstance(a, Simplex) else Simplex(tuple(a))
    if simplex.k != f.k:
        raise ValueError(f"simplex has {simplex.k} intercepts, polynomial has k={f.k}")
    if any(x < 2 for x in simplex.a):
        raise BoundNotApplicable("all simplex intercepts must be at least 2")
    if not simplex.encloses(exponent_profile(f)):
        raise BoundNotApplicable("the simplex does not enclose E_f")
    return clamp(simplex.objective(), f.n, Method.SIMPLEX_FIT, simplex)


def fit_simplex(profile: Iterable[ExponentTuple], weight_cap: int = 8) -> Simplex:
    """Best simplex among those cut out by integer weights in {1..cap}^k.

    The degree is inflated to at least 2*max(w) so every intercept is >= 2;
    ties go to the lexicographically smallest weight vector.
    """
    pts = np.array(sorted(set(map(tuple, profile))), dtype=np.int64)
    if pts.size == 0:
        raise ValueError("cannot fit a simplex to an empty profile")
    if weight_cap < 1:
        raise ValueError("weight_cap must be >= 1")
    k = pts.shape[1]
    grid = np.array(list(itertools.product(range(1, weight_cap + 1), repeat=k)), dtype=np.int64)
    d = (grid @ pts.T).max(axis=1)
    d = np.maximum(d, 2 * grid.max(axis=1))
    obj = np.prod(d[:, None] // grid, axis=1)
    best = int(np.argmin(obj))  # first minimum == lexicographically smallest w
    return Simplex.from_weights(tuple(int(x) for x in grid[best]), int(d[best]))


def _shrink_to_floors(pts: Sequence[Sequence[int]], floors: Sequence[int]) -> Simplex:
    """Intercepts just below floor+1 that still enclose the points."""
    eps = Fraction(1, 1000)
    while True:
        s = Simplex(tuple(f + 1 - eps for f in floors))
        if s.encloses(pts):
            return s
        eps /= 2


def fit_simplex_exact(profile: Iterable[ExponentTuple], min_floor: int = 2,
                      upper: Optional[int] = None) -> Simplex:
    """Minimise prod(floor(a_j)) over all rational simplices enclosing the profile.

    A floor vector ``f`` is achievable iff sum_j alpha_j / (f_j + 1) < 1 for
    every point, so the search is a finite branch and bound over integer
    vectors with ``f_j >= min_floor``.  ``upper`` is an optional known
    achievable objective used for pruning.
    """
    pts = sorted(set(tuple(p) for p in profile))
    if not pts:
        raise ValueError("cannot fit a simplex to an empty profile")
    if min_floor < 1:
        raise ValueError("min_floor must be >= 1")
    k = len(pts[0])
    cols = list(zip(*pts))
    # always-feasible start: f_j = k * max_j alpha_j
    start = tuple(max(min_floor, k * max(c)) for c in cols)
    best_val = math.prod(start) if upper is None else min(upper, math.prod(start))
    # branch on coordinates with large spread first
    order = sorted(range(k), key=lambda j: -max(cols[j]))
    pts_o = [tuple(p[j] for j in order) for p in pts]
    found: List[Tuple[int, ...]] = []

    def dfs(depth: int, partial: List[Fraction], prod_so_far: int, chosen: Tuple[int, ...]):
        nonlocal best_val, found
        if depth == k:
            if prod_so_far < best_val:
                best_val, found = prod_so_far, [chosen]
            elif prod_so_far == best_val:
                found.append(chosen)
            return
        top = best_val // (prod_so_far * min_floor ** (k - depth - 1))
        for fj in range(min_floor, top + 1):
            new_partial = [s + Fraction(p[depth], fj + 1) for s, p in zip(partial, pts_o)]
            if any(s >= 1 for s in new_partial):
                continue
            dfs(depth + 1, new_partial, prod_so_far * fj, chosen + (fj,))

    dfs(0, [Fraction(0)] * len(pts), 1, ())
    candidates = []
    for fo in found:
        f = [0] * k
        for pos, j in enumerate(order):
            f[j] = fo[pos]
        candidates.append(tuple(f))
    floors = min(candidates) if candidates else start
    return _shrink_to_floors(pts, floors)


def kappa_degree_power(f: Polynomial) -> KappaBound:
    _require_symmetric(f)
    d = f.degree()
    if d == MINUS_INFINITY or d < 2:
        raise BoundNotApplicable(f"degree {d} < 2")
    return clamp(d ** f.k, f.n, Method.DEGREE_POWER, d)


def kappa_column_degrees(f: Polynomial) -> KappaBound:
    _require_symmetric(f)
    k = f.k
    if k < 2:
        raise BoundNotApplicable("column-degree bound needs k >= 2")
    degs = f.column_degrees()
    if any(dj < 1 for dj in degs):
        raise BoundNotApplicable(f"column degrees {degs}: drop absent columns first")
    return clamp(k ** k * math.prod(degs), f.n, Method.COLUMN_DEGREES, degs)


def kappa_half_degree_k1(f: Polynomial) -> KappaBound:
    _require_symmetric(f)
    if f.k != 1:
        raise BoundNotApplicable("the half-degree bound is for k = 1")
    d = f.degree()
    half = 0 if d == MINUS_INFINITY else d // 2
    return clamp(max(2, half), f.n, Method.HALF_DEGREE_K1, d)


def kappa_affine(f: Polynomial) -> KappaBound:
    """Degree <= 1: a symmetric affine function is minimised on the diagonal."""
    _require_symmetric(f)
    if f.degree() > 1:
        raise BoundNotApplicable("not affine")
    return clamp(1, f.n, Method.AFFINE, f.degree() if not f.is_zero() else None)


def applicable_bounds(f: Polynomial, weight_cap: int = 8) -> List[KappaBound]:
    _require_symmetric(f)
    out = []
    prof = exponent_profile(f)

    def simplex_fit():
        return kappa_simplex(f, fit_simplex(prof, weight_cap))

    def simplex_exact():
        b = kappa_simplex(f, fit_simplex_exact(prof, 2))
        return KappaBound(b.value, Method.SIMPLEX_EXACT, b.witness, b.n_clamped, b.raw_value)

    candidates = [lambda: kappa_affine(f), lambda: kappa_half_degree_k1(f), simplex_fit,
                  simplex_exact, lambda: kappa_weighted(f, (1,) * f.k),
                  lambda: kappa_degree_power(f), lambda: kappa_column_degrees(f)]
    for make in candidates:
        try:
            out.append(make())
        except BoundNotApplicable:
            pass
    return out


def best_kappa(f: Polynomial, weight_cap: int = 8) -> KappaBound:
    """Smallest applicable bound; the earliest method wins ties."""
    bounds = applicable_bounds(f, weight_cap)
    return min(bounds, key=lambda b: b.value)


# ---------------------------------------------------------------------------
# partitions

@lru_cache(maxsize=None)
def _partition_table(n: int) -> Tuple[Tuple[int, ...], ...]:
    # p[m][l] = partitions of m into exactly l parts = p[m-1][l-1] + p[m-l][l]
    p = [[0] * (n + 1) for _ in range(n + 1)]
    p[0][0] = 1
    for m in range(1, n + 1):
        for ell in range(1, m + 1):
            p[m][ell] = p[m - 1][ell - 1] + p[m - ell][ell]
    return tuple(tuple(row) for row in p)


def count_partitions(n: int, ell: int) -> int:
    """Number of partitions of n into exactly ``ell`` positive parts."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got n={n}, ell={ell}")
    c = _partition_table(n)[n][ell]
    assert c <= n ** ell
    return c
