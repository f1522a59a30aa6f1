"""Numerical oracles: multistart minimisation on spheres.

Nothing here is a certificate.  A reported counterexample is re-checked in
exact rational arithmetic; "no counterexample found" only means the search
came up empty.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from .bounds import KappaBound
from .poly import Polynomial, evaluate
from .reduce import Restrictor, ReducedInstance, enumerate_subspaces_up_to, expand_point

ARMIJO_C = 1e-4
MAX_ITER = 500
GRAD_TOL = 1e-10
STALL_GRAD_TOL = 1e-6
MAX_HALVINGS = 40
NOISE_GAIN = 1e-13
NEGATIVE_TOL = 1e-9
CONSISTENCY_TOL = 1e-5


def default_starts(nvars: int) -> int:
    return 64 if nvars <= 12 else 256


def worker_count() -> int:
    cap = os.environ.get("MULTISYM_THREADS")
    cores = os.cpu_count() or 1
    if cap:
        try:
            return max(1, min(cores, int(cap)))
        except ValueError:
            pass
    return cores


def substream(seed: int, *item: int) -> np.random.Generator:
    """Independent counter-based stream for one work item."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *item])))


@dataclass(frozen=True)
class SphereSpec:
    radius_sq: Fraction

    def __post_init__(self):
        r = Fraction(self.radius_sq)
        if r <= 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "radius_sq", r)


def as_sphere(s) -> SphereSpec:
    return s if isinstance(s, SphereSpec) else SphereSpec(Fraction(s))


@dataclass
class MinReport:
    value: float
    argmin: np.ndarray
    starts: int
    converged_fraction: float
    seed: int
    lam: Optional[Tuple[int, ...]] = None

    def as_json(self) -> dict:
        out = {"value": self.value, "argmin": self.argmin.tolist(), "starts": self.starts,
               "converged_fraction": self.converged_fraction, "seed": self.seed}
        if self.lam is not None:
            out["lambda"] = list(self.lam)
        return out


# ---------------------------------------------------------------------------
# compiled evaluator

class CompiledPoly:
    """Batched float evaluation of a polynomial and its gradient.

    The polynomial is written as z^T Q z where z runs over a down-closed set
    of monomials of degree <= ceil(D/2).  Each monomial of f is split into
    two halves, so Q has one nonzero per term and both value and gradient
    cost a sparse product plus a few gathers.
    """

    def __init__(self, f: Polynomial):
        self.nvars = f.n * f.k
        degree = f.degree()
        half = max(1, math.ceil(max(degree, 0) / 2))
        index: Dict[Tuple[int, ...], int] = {(): 0}
        # parents[m] = (parent monomial index, variable) with z_m = z_parent * x_var
        build: List[Tuple[int, int]] = [(-1, -1)]
        levels: List[List[int]] = [[0]]

        def intern(vs: Tuple[int, ...]) -> int:
            if vs in index:
                return index[vs]
            parent = intern(vs[:-1])
            index[vs] = len(build)
            build.append((parent, vs[-1]))
            while len(levels) <= len(vs):
                levels.append([])
            levels[len(vs)].append(index[vs])
            return index[vs]

        rows, cols, vals = [], [], []
        for mono, c in f.items():
            vs = tuple(v for v, e in mono for _ in range(e))
            cut = min(half, len(vs))
            rows.append(intern(vs[:cut]))
            cols.append(intern(vs[cut:]))
            vals.append(float(c))
        size = len(build)
        q = sparse.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
        self.q_sym = (q + q.T).tocsr()
        self.q = q
        self.size = size
        self.levels = [np.array(sorted(lv), dtype=np.int64) for lv in levels[1:]]
        self.parent = np.array([p for p, _ in build], dtype=np.int64)
        self.var = np.array([v for _, v in build], dtype=np.int64)
        # d z_m / d x_i = (multiplicity of i in m) * z_{m - e_i}
        d_m, d_i, d_p, d_e = [], [], [], []
        for vs, m in index.items():
            for i in set(vs):
                rest = list(vs)
                rest.remove(i)
                d_m.append(m)
                d_i.append(i)
                d_p.append(index[tuple(rest)])
                d_e.append(float(vs.count(i)))
        self.d_m = np.array(d_m, dtype=np.int64)
        self.d_p = np.array(d_p, dtype=np.int64)
        self.d_e = np.array(d_e)
        self.scatter = sparse.coo_matrix(
            (np.ones(len(d_i)), (np.arange(len(d_i)), d_i)),
            shape=(len(d_i), self.nvars)).tocsr()

    def _z(self, x: np.ndarray) -> np.ndarray:
        z = np.empty((x.shape[0], self.size))
        z[:, 0] = 1.0
        for lv in self.levels:
            z[:, lv] = z[:, self.parent[lv]] * x[:, self.var[lv]]
        return z

    def value(self, x: np.ndarray) -> np.ndarray:
        z = self._z(x)
        return np.einsum("bi,bi->b", (self.q @ z.T).T, z)

    def value_grad(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = self._z(x)
        qz = (self.q @ z.T).T
        val = np.einsum("bi,bi->b", qz, z)
        if len(self.d_m) == 0:
            return val, np.zeros_like(x)
        s = (self.q_sym @ z.T).T
        contrib = s[:, self.d_m] * z[:, self.d_p] * self.d_e
        grad = (self.scatter.T @ contrib.T).T
        return val, np.asarray(grad)


# ---------------------------------------------------------------------------
# projected gradient on a (weighted) sphere

def _normalize(u: np.ndarray, radius: float) -> np.ndarray:
    norms = np.linalg.norm(u, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return u * (radius / norms)


def _descend(comp: CompiledPoly, scale: np.ndarray, radius: float, u0: np.ndarray,
             max_iter: int = MAX_ITER) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimise f(scale * u) over |u| = radius for a batch of starts.

    Riemannian steepest descent, retraction by renormalising, Armijo
    backtracking by halving.  The first trial step is 1.0; later ones are the
    Barzilai-Borwein step from the previous move.
    """
    u = _normalize(u0, radius)
    val, g = comp.value_grad(u * scale)
    g = g * scale
    n_starts = len(u)
    active = np.ones(n_starts, dtype=bool)
    converged = np.zeros(n_starts, dtype=bool)
    trial_step = np.ones(n_starts)
    prev_u = np.zeros_like(u)
    prev_t = np.zeros_like(u)
    first = True
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ua, va, ga = u[idx], val[idx], g[idx]
        radial = np.einsum("bi,bi->b", ga, ua) / (radius * radius)
        tangent = ga - radial[:, None] * ua
        gnorm2 = np.einsum("bi,bi->b", tangent, tangent)
        if not first:
            ds = ua - prev_u[idx]
            dy = tangent - prev_t[idx]
            sy = np.einsum("bi,bi->b", ds, dy)
            ss = np.einsum("bi,bi->b", ds, ds)
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 1.0)
            trial_step[idx] = np.clip(bb, 1e-12, 1e12)
        first = False
        done = np.sqrt(gnorm2) <= GRAD_TOL * (1.0 + np.abs(va))
        converged[idx[done]] = True
        active[idx[done]] = False
        keep = ~done
        idx, ua, va, tangent, gnorm2 = idx[keep], ua[keep], va[keep], tangent[keep], gnorm2[keep]
        if idx.size == 0:
            break
        prev_u[idx] = ua
        prev_t[idx] = tangent
        # never move further than one radius along the tangent
        step = np.minimum(trial_step[idx], radius / np.maximum(np.sqrt(gnorm2), 1e-300))
        pending = np.arange(idx.size)
        new_u = ua.copy()
        new_v = va.copy()
        for _ in range(MAX_HALVINGS):
            if pending.size == 0:
                break
            trial = _normalize(ua[pending] - step[pending, None] * tangent[pending], radius)
            tv = comp.value(trial * scale)
            ok = tv <= va[pending] - ARMIJO_C * step[pending] * gnorm2[pending]
            new_u[pending[ok]] = trial[ok]
            new_v[pending[ok]] = tv[ok]
            pending = pending[~ok]
            step[pending] *= 0.5
        # a failed line search means the decrease is below rounding: stop there,
        # and count it as converged only if the gradient is already small
        stalled = np.zeros(idx.size, dtype=bool)
        stalled[pending] = True
        flat = np.sqrt(gnorm2[pending]) <= STALL_GRAD_TOL * (1.0 + np.abs(va[pending]))
        converged[idx[pending[flat]]] = True
        active[idx[stalled]] = False
        # accepted steps whose gain is rounding noise at a small gradient: done
        noise = (va - new_v <= NOISE_GAIN * (1.0 + np.abs(va))) & ~stalled
        noise &= np.sqrt(gnorm2) <= STALL_GRAD_TOL * (1.0 + np.abs(va))
        converged[idx[noise]] = True
        active[idx[noise]] = False
        moved = ~stalled
        if moved.any():
            mi = idx[moved]
            u[mi] = new_u[moved]
            v2, g2 = comp.value_grad(u[mi] * scale)
            val[mi] = v2
            g[mi] = g2 * scale
    return u, val, converged


def _minimize(comp: CompiledPoly, weights: Optional[Sequence[float]], r: Fraction,
              starts: int, rng: np.random.Generator) -> Tuple[float, np.ndarray, float]:
    nv = comp.nvars
    scale = np.ones(nv) if weights is None else 1.0 / np.sqrt(np.asarray(weights, dtype=float))
    radius = math.sqrt(float(r))
    u0 = rng.standard_normal((starts, nv))
    u, val, conv = _descend(comp, scale, radius, u0)
    best = int(np.argmin(val))
    return float(val[best]), u[best] * scale, float(conv.mean())


def _report(f: Polynomial, x: np.ndarray, starts: int, conv: float, seed: int,
            lam=None) -> MinReport:
    arr = x.reshape(f.n, f.k)
    value = float(evaluate(f, arr.tolist()))
    return MinReport(value, arr, starts, conv, seed, lam)


def min_on_sphere(f: Polynomial, s, starts: Optional[int] = None, seed: int = 0,
                  _item: Tuple[int, ...] = (0,)) -> MinReport:
    s = as_sphere(s)
    starts = default_starts(f.n * f.k) if starts is None else starts
    if starts < 1:
        raise ValueError("starts must be >= 1")
    comp = CompiledPoly(f)
    _, x, conv = _minimize(comp, None, s.radius_sq, starts, substream(seed, *_item))
    return _report(f, x, starts, conv, seed)


def _min_instance(inst: ReducedInstance, s: SphereSpec, starts: int, seed: int,
                  item: Tuple[int, ...]) -> MinReport:
    comp = CompiledPoly(inst.q)
    _, y, conv = _minimize(comp, inst.sphere_weights(), s.radius_sq, starts, substream(seed, *item))
    return _report(inst.q, y, starts, conv, seed, inst.lam)


def _map(fn, items):
    workers = worker_count()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def min_on_reduced(f: Polynomial, m: int, s, starts: Optional[int] = None,
                   seed: int = 0) -> MinReport:
    """Best sphere minimum over every restriction of f to a subspace of A_m.

    The returned argmin is expanded back to an n x k point.
    """
    if not 1 <= m <= f.n:
        raise ValueError(f"need 1 <= m <= n, got m={m}")
    s = as_sphere(s)
    restrictor = Restrictor(f)
    lams = list(enumerate_subspaces_up_to(f.n, m))

    def run(pair):
        i, lam = pair
        inst = restrictor(lam)
        st = default_starts(inst.q.n * inst.q.k) if starts is None else starts
        return _min_instance(inst, s, st, seed, (1, i))

    reports = _map(run, list(enumerate(lams)))
    best = min(reports, key=lambda rep: rep.value)
    x = np.array(expand_point(best.argmin.tolist(), best.lam), dtype=float)
    total = sum(rep.starts for rep in reports)
    conv = sum(rep.converged_fraction * rep.starts for rep in reports) / total
    return MinReport(float(evaluate(f, x.tolist())), x, total, conv, seed, best.lam)


@dataclass
class ConsistencyRecord:
    radius_sq: Fraction
    full: MinReport
    reduced: MinReport
    tol: float

    @property
    def gap(self) -> float:
        return abs(self.full.value - self.reduced.value)

    @property
    def passed(self) -> bool:
        return self.gap <= self.tol * (1.0 + abs(self.full.value))


@dataclass
class ConsistencyReport:
    m: int
    records: List[ConsistencyRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    def lines(self) -> List[str]:
        out = []
        for rec in self.records:
            out.append(f"r={rec.radius_sq} method=full value={rec.full.value:.12g}")
            out.append(f"r={rec.radius_sq} method=reduced(m={self.m}) value={rec.reduced.value:.12g} "
                       f"gap={rec.gap:.3g} {'PASS' if rec.passed else 'FAIL'}")
        return out

    def as_json(self) -> dict:
        return {"m": self.m, "passed": self.passed,
                "records": [{"radius_sq": str(rec.radius_sq), "full": rec.full.value,
                             "reduced": rec.reduced.value, "gap": rec.gap,
                             "passed": rec.passed} for rec in self.records]}


def kappa_consistency_experiment(f: Polynomial, bound, radii: Iterable, starts: Optional[int] = None,
                                 seed: int = 0, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    m = bound.value if isinstance(bound, KappaBound) else int(bound)
    m = min(m, f.n)
    report = ConsistencyReport(m)
    for ri, r in enumerate(radii):
        s = as_sphere(r)
        full = min_on_sphere(f, s, starts, seed, _item=(0, ri))
        red = min_on_reduced(f, m, s, starts, seed + ri)
        report.records.append(ConsistencyRecord(s.radius_sq, full, red, tol))
    return report


# ---------------------------------------------------------------------------
# heuristic non-negativity

@dataclass(frozen=True)
class NoCounterexampleFound:
    best_value: float
    heuristic: bool = True

    def __str__(self):
        return f"NoCounterexampleFound (heuristic; lowest value seen {self.best_value:.3g})"


@dataclass(frozen=True)
class CounterexampleAt:
    point: Tuple[Tuple[Fraction, ...], ...]
    value: float
    confirmed: bool
    exact_value: Optional[Fraction] = None

    def __str__(self):
        tag = "confirmed exactly" if self.confirmed else "not confirmed exactly"
        return f"CounterexampleAt value={self.value:.6g} ({tag})"


Verdict = Union[NoCounterexampleFound, CounterexampleAt]


def _rationalize(x: np.ndarray, denom: int = 10 ** 12) -> List[List[Fraction]]:
    return [[Fraction(float(v)).limit_denominator(denom) for v in row] for row in x]


def nonneg_check(q: Polynomial, radii: Iterable, starts: Optional[int] = None, seed: int = 0,
                 weights: Optional[Sequence[float]] = None, item: int = 0) -> Verdict:
    """Look for a point where q < 0: the origin plus multistart minima on each sphere.

    ``weights`` gives the sphere sum(w * y^2) = r, as used for reduced instances.
    """
    origin = q.constant_term()
    best_val, best_x = float(origin), np.zeros((q.n, q.k))
    comp = CompiledPoly(q)
    st = default_starts(q.n * q.k) if starts is None else starts
    for ri, r in enumerate(radii):
        s = as_sphere(r)
        val, x, _ = _minimize(comp, weights, s.radius_sq, st, substream(seed, item, ri))
        val = float(evaluate(q, x.reshape(q.n, q.k).tolist()))
        if val < best_val:
            best_val, best_x = val, x.reshape(q.n, q.k)
    if best_val >= -NEGATIVE_TOL:
        return NoCounterexampleFound(best_val)
    point = _rationalize(best_x)
    exact = evaluate(q, point)
    return CounterexampleAt(tuple(map(tuple, point)), best_val, exact < 0, exact)


def check_instances(instances: Iterable[ReducedInstance], radii: Sequence, starts: Optional[int] = None,
                    seed: int = 0) -> List[Tuple[ReducedInstance, Verdict]]:
    radii = list(radii)

    def run(pair):
        i, inst = pair
        return inst, nonneg_check(inst.q, radii, starts, seed, inst.sphere_weights(), item=i)

    return _map(run, list(enumerate(instances)))
