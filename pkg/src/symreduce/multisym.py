"""Row-permutation symmetry, multisymmetric power sums and power-sum rewriting.

S_n acts on a polynomial in x[i,j] by permuting rows.  ``sym`` sums the
*distinct* images (the orbit as a set), so ``sym(x11*x21)`` on three rows
has three terms, not six.
"""

from __future__ import annotations

import itertools
import math
import operator
import re
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .poly import (MINUS_INFINITY, Mono, Polynomial, PolyFormatError, ShapeError,
                   iter_polynomial_blocks)

ExponentTuple = Tuple[int, ...]
ExponentProfile = FrozenSet[ExponentTuple]
RowType = Tuple[ExponentTuple, ...]


class NotSymmetricError(ValueError):
    """Raised when an operation needs a k-symmetric polynomial."""


def _check_weights(w: Sequence[int], k: int) -> Tuple[int, ...]:
    w = tuple(int(x) for x in w)
    if len(w) != k or any(x < 1 for x in w):
        raise ValueError(f"weights must be {k} positive integers, got {w}")
    return w


def row_exponents(m: Mono, k: int) -> Dict[int, ExponentTuple]:
    rows: Dict[int, List[int]] = {}
    for v, e in m:
        rows.setdefault(v // k, [0] * k)[v % k] = e
    return {i: tuple(a) for i, a in rows.items()}


def row_type(m: Mono, k: int) -> RowType:
    """Multiset of nonzero row exponent tuples, sorted descending."""
    return tuple(sorted(row_exponents(m, k).values(), reverse=True))


def _orbit_sum_monomial(row_tuples: Sequence[ExponentTuple], n: int, k: int,
                        coeff: Fraction = Fraction(1)) -> Dict[Mono, Fraction]:
    """Sum of the distinct monomials X_{r1}^{a1}...X_{rl}^{al} over distinct rows."""
    ell = len(row_tuples)
    if ell > n:
        return {}
    counts = Counter(row_tuples)
    values = sorted(counts)
    out: Dict[Mono, Fraction] = {}

    # choose disjoint row sets for each distinct tuple value
    def place(idx: int, free: Tuple[int, ...], acc: List[Tuple[int, int]]):
        if idx == len(values):
            out[tuple(sorted(acc))] = coeff
            return
        alpha = values[idx]
        for rows in itertools.combinations(free, counts[alpha]):
            chosen = set(rows)
            extra = [(r * k + j, e) for r in rows for j, e in enumerate(alpha) if e]
            place(idx + 1, tuple(r for r in free if r not in chosen), acc + extra)

    place(0, tuple(range(n)), [])
    return out


_STABILIZER_SEARCH_LIMIT = 2_000_000


def _stabilizer_order(f: Polynomial) -> int:
    """|{sigma in S_n : sigma f = f}|, by search over the rows f actually uses."""
    n, k = f.shape
    used = sorted(f.rows_used())
    # rows can only map to rows with an identical local signature
    sig: Dict[int, list] = {r: [] for r in used}
    for m, c in f.items():
        rex = row_exponents(m, k)
        t = tuple(sorted(rex.values()))
        for r, a in rex.items():
            sig[r].append((c, a, t))
    classes: Dict[tuple, List[int]] = {}
    for r in used:
        classes.setdefault(tuple(sorted(sig[r])), []).append(r)
    groups = list(classes.values())
    if math.prod(math.factorial(len(g)) for g in groups) > _STABILIZER_SEARCH_LIMIT:
        raise ValueError("symmetrize: stabilizer search too large for this input")
    count = 0
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        perm = list(range(n))
        for g, img in zip(groups, choice):
            for a, b in zip(g, img):
                perm[a] = b
        if f.permute_rows(perm) == f:
            count += 1
    return count * math.factorial(n - len(used))


def symmetrize(f: Polynomial) -> Polynomial:
    """Sum of the distinct images of ``f`` under row permutations."""
    n, k = f.shape
    if f.is_zero() or is_k_symmetric(f):
        return f
    # sum over all n! permutations, computed per monomial orbit
    full: Dict[Mono, Fraction] = {}
    for m, c in f.items():
        t = row_type(m, k)
        stab = math.factorial(n - len(t))
        for mult in Counter(t).values():
            stab *= math.factorial(mult)
        for mm, _ in _orbit_sum_monomial(t, n, k).items():
            full[mm] = full.get(mm, 0) + c * stab
    return Polynomial(n, k, full).scale(Fraction(1, _stabilizer_order(f)))


def is_k_symmetric(f: Polynomial) -> bool:
    """Invariance under a transposition and an n-cycle, which generate S_n."""
    n = f.n
    if n == 1:
        return True
    swap = [1, 0] + list(range(2, n))
    if f.permute_rows(swap) != f:
        return False
    cycle = [(i + 1) % n for i in range(n)]
    return f.permute_rows(cycle) == f


def _shape(shape) -> Tuple[int, int]:
    n, k = shape
    if n < 1 or k < 1:
        raise ShapeError(f"bad shape {shape}")
    return int(n), int(k)


def power_sum(alpha: Sequence[int], shape) -> Polynomial:
    """p_alpha = sum_i x[i,1]^a1 ... x[i,k]^ak."""
    n, k = _shape(shape)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != k or any(a < 0 for a in alpha):
        raise ValueError(f"exponent tuple {alpha} does not fit k={k}")
    if not any(alpha):
        raise ValueError("the zero tuple is not a power-sum index")
    terms = {}
    for i in range(n):
        terms[tuple((i * k + j, a) for j, a in enumerate(alpha) if a)] = Fraction(1)
    return Polynomial._raw(n, k, terms)


def monomial_function(alphas: Sequence[Sequence[int]], shape) -> Polynomial:
    n, k = _shape(shape)
    alphas = [tuple(int(a) for a in al) for al in alphas]
    if len(alphas) > n:
        raise ValueError(f"{len(alphas)} exponent tuples do not fit on {n} rows")
    for al in alphas:
        if len(al) != k or any(a < 0 for a in al):
            raise ValueError(f"exponent tuple {al} does not fit k={k}")
        if not any(al):
            raise ValueError("exponent tuples of a monomial function must be nonzero")
    return Polynomial._raw(n, k, _orbit_sum_monomial(alphas, n, k))


def exponent_profile(f: Polynomial) -> ExponentProfile:
    """E_f: collapse every monomial along rows (x[i,j] -> Y_j)."""
    k = f.k
    pts = set()
    for m in f.terms:
        a = [0] * k
        for v, e in m:
            a[v % k] += e
        pts.add(tuple(a))
    return frozenset(pts)


def weighted_degree(f: Polynomial, w: Sequence[int]) -> Union[int, float]:
    w = _check_weights(w, f.k)
    prof = exponent_profile(f)
    if not prof:
        return MINUS_INFINITY
    return max(sum(a * b for a, b in zip(w, alpha)) for alpha in prof)


def profile_weighted_degree(profile: Iterable[ExponentTuple], w: Sequence[int]) -> Union[int, float]:
    return max((sum(a * b for a, b in zip(w, alpha)) for alpha in profile),
               default=MINUS_INFINITY)


# ---------------------------------------------------------------------------
# the abstract power-sum algebra

ZMono = Tuple[Tuple[ExponentTuple, int], ...]


def _zmul(a: ZMono, b: ZMono) -> ZMono:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for z, e in b:
        out[z] = out.get(z, 0) + e
    return tuple(sorted(out.items()))


class PowerSumExpr:
    """Polynomial in symbols Z_alpha standing for the power sums p_alpha."""

    __slots__ = ("k", "terms")

    def __init__(self, k: int, terms: Mapping[ZMono, Fraction] | None = None):
        self.k = k
        self.terms: Dict[ZMono, Fraction] = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[m] = self.terms.get(m, 0) + c
                if not self.terms[m]:
                    del self.terms[m]

    @classmethod
    def symbol(cls, alpha: ExponentTuple) -> "PowerSumExpr":
        alpha = tuple(alpha)
        if not any(alpha):
            raise ValueError("Z_0 is not a power-sum symbol")
        return cls(len(alpha), {((alpha, 1),): Fraction(1)})

    @classmethod
    def constant(cls, c, k: int) -> "PowerSumExpr":
        return cls(k, {(): Fraction(c)})

    def __add__(self, other: "PowerSumExpr") -> "PowerSumExpr":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return PowerSumExpr(self.k, out)

    def __sub__(self, other: "PowerSumExpr") -> "PowerSumExpr":
        return self + other.scale(-1)

    def scale(self, c) -> "PowerSumExpr":
        c = Fraction(c)
        return PowerSumExpr(self.k, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other: "PowerSumExpr") -> "PowerSumExpr":
        out: Dict[ZMono, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _zmul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return PowerSumExpr(self.k, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSumExpr) and self.k == other.k and self.terms == other.terms

    def __repr__(self) -> str:
        return f"PowerSumExpr(k={self.k}, {len(self.terms)} terms)"

    def symbols(self) -> set:
        return {z for m in self.terms for z, _ in m}

    def is_linear(self) -> bool:
        return all(sum(e for _, e in m) <= 1 for m in self.terms)

    def substitute(self, image: Callable[[ExponentTuple], Polynomial], n: int, k: int,
                   memo: Optional[dict] = None) -> Polynomial:
        """Replace every Z_alpha by ``image(alpha)``, a Polynomial of shape (n, k).

        The expansion runs on dense exponent vectors with integer
        coefficients over one common denominator, which is far faster than
        Fraction arithmetic when the output is large.
        """
        nv = n * k
        zero = (0,) * nv

        def dense(p: Polynomial):
            den = math.lcm(*(c.denominator for c in p.terms.values())) if len(p) else 1
            out = {}
            for m, c in p.items():
                vec = [0] * nv
                for v, e in m:
                    vec[v] = e
                out[tuple(vec)] = int(c * den)
            return out, den

        def mul(a, b):
            out = {}
            for ma, ca in a.items():
                for mb, cb in b.items():
                    m = tuple(map(operator.add, ma, mb))
                    out[m] = out.get(m, 0) + ca * cb
            return out

        images: Dict[ExponentTuple, Tuple[dict, int]] = {}
        powers: Dict[Tuple[ExponentTuple, int], dict] = {}

        def power(z, e):
            if (z, e) not in powers:
                if z not in images:
                    images[z] = dense(image(z))
                base = images[z][0]
                powers[(z, e)] = base if e == 1 else mul(power(z, e - 1), base)
            return powers[(z, e)]

        # term = c / prod(den_z^e) * prod(int_image_z^e)
        multipliers = {}
        for m, c in self.terms.items():
            for z, _ in m:
                if z not in images:
                    images[z] = dense(image(z))
            multipliers[m] = c / math.prod(images[z][1] ** e for z, e in m)
        common = math.lcm(*(r.denominator for r in multipliers.values())) if multipliers else 1
        if memo is None:
            memo = {}
        scaled = [(int(r * common), m) for m, r in multipliers.items()]
        coded = _expand_coded(scaled, images, nv)
        if coded is not None:
            return _decode(coded, n, k, common, memo)
        total: Dict[tuple, int] = {}
        for m, r in multipliers.items():
            t = {zero: int(r * common)}
            for z, e in sorted(m, key=lambda ze: len(images[ze[0]][0]) * ze[1]):
                t = mul(t, power(z, e))
            for mono, v in t.items():
                total[mono] = total.get(mono, 0) + v
        # ``memo`` may be shared across calls with the same shape: it caches
        # the sparse form of each exponent vector and the Fraction objects
        sparse_of = memo.setdefault(("sparse", nv), {})
        fractions = memo.setdefault(("frac", common), {})
        out = {}
        for vec, v in total.items():
            if not v:
                continue
            mono = sparse_of.get(vec)
            if mono is None:
                mono = sparse_of[vec] = tuple(itertools.compress(enumerate(vec), vec))
            c = fractions.get(v)
            if c is None:
                c = fractions[v] = Fraction(v, common)
            out[mono] = c
        return Polynomial._raw(n, k, out)

    def to_text(self) -> str:
        return format_psexpr(self)


_CODE_LIMIT = 1 << 62
_PAIR_LIMIT = 20_000_000


def _expand_coded(scaled, images, nv: int):
    """Expand sum c * prod(image_z^e) with each exponent vector packed into one int64.

    With base B above every exponent that can occur, adding codes multiplies
    monomials without carries.  Returns None when the codes or the integer
    coefficients could overflow, or the products get too large.
    """
    deg = {z: max((sum(vec) for vec in d), default=0) for z, (d, _) in images.items()}
    top = max((sum(deg[z] * e for z, e in m) for _, m in scaled), default=0)
    base = max(top + 1, 2)
    if base ** nv >= _CODE_LIMIT:
        return None
    l1 = {z: sum(abs(c) for c in d.values()) for z, (d, _) in images.items()}
    if sum(abs(c) * math.prod(l1[z] ** e for z, e in m) for c, m in scaled) >= _CODE_LIMIT:
        return None
    weights = [base ** v for v in range(nv)]
    arrays = {}
    for z, (d, _) in images.items():
        codes = np.array([sum(e * w for e, w in zip(vec, weights) if e) for vec in d], dtype=np.int64)
        arrays[z] = (codes, np.array(list(d.values()), dtype=np.int64))

    def collect(codes, coefs):
        if not len(codes):
            return codes, coefs
        order = np.argsort(codes, kind="stable")
        codes, coefs = codes[order], coefs[order]
        start = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
        return codes[start], np.add.reduceat(coefs, start)

    def mul(a, b):
        if len(a[0]) * len(b[0]) > _PAIR_LIMIT:
            raise OverflowError
        return collect((a[0][:, None] + b[0][None, :]).ravel(), (a[1][:, None] * b[1][None, :]).ravel())

    powers = {}

    def power(z, e):
        if (z, e) not in powers:
            powers[(z, e)] = arrays[z] if e == 1 else mul(power(z, e - 1), arrays[z])
        return powers[(z, e)]

    parts_c, parts_v = [], []
    try:
        for c, m in scaled:
            t = (np.zeros(1, dtype=np.int64), np.array([c], dtype=np.int64))
            for z, e in sorted(m, key=lambda ze: len(arrays[ze[0]][0]) * ze[1]):
                t = mul(t, power(z, e))
            parts_c.append(t[0])
            parts_v.append(t[1])
    except OverflowError:
        return None
    if not parts_c:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), base
    codes, coefs = collect(np.concatenate(parts_c), np.concatenate(parts_v))
    keep = coefs != 0
    return codes[keep], coefs[keep], base


def _decode(coded, n: int, k: int, common: int, memo: dict) -> Polynomial:
    codes, coefs, base = coded
    nv = n * k
    sparse_of = memo.setdefault(("code", nv, base), {})
    fractions = memo.setdefault(("frac", common), {})
    out = {}
    for code, v in zip(codes.tolist(), coefs.tolist()):
        mono = sparse_of.get(code)
        if mono is None:
            rest, pairs = code, []
            for var in range(nv):
                rest, e = divmod(rest, base)
                if e:
                    pairs.append((var, e))
                if not rest:
                    break
            mono = sparse_of[code] = tuple(pairs)
        c = fractions.get(v)
        if c is None:
            c = fractions[v] = Fraction(v, common)
        out[mono] = c
    return Polynomial._raw(n, k, out)


def substitute_power_sums(F: PowerSumExpr, n: int) -> Polynomial:
    """Expand F with Z_alpha -> p_alpha on n rows."""
    return F.substitute(lambda a: power_sum(a, (n, F.k)), n, F.k)


def _add_tuples(a: ExponentTuple, b: ExponentTuple) -> ExponentTuple:
    return tuple(x + y for x, y in zip(a, b))


def _canon(t: Iterable[ExponentTuple]) -> RowType:
    return tuple(sorted(t, reverse=True))


def product_expansion(alpha0: ExponentTuple, beta: RowType) -> Tuple[int, Dict[RowType, int]]:
    """Expand p_{alpha0} * m_beta in monomial functions.

    Returns ``(c, merged)`` with
    ``p_{alpha0} m_beta = c * m_{(alpha0, beta)} + sum(merged[g] * m_g)``.
    ``c`` is the multiplicity of alpha0 in (alpha0, beta); a merged type
    gets the multiplicity of its merged tuple.
    """
    full = _canon((alpha0,) + tuple(beta))
    c = full.count(alpha0)
    merged: Dict[RowType, int] = {}
    for t in set(beta):
        grown = _add_tuples(t, alpha0)
        rest = list(beta)
        rest.remove(t)
        g = _canon(rest + [grown])
        merged[g] = g.count(grown)
    return c, merged


@lru_cache(maxsize=None)
def monomial_function_expr(rtype: RowType) -> PowerSumExpr:
    """Power-sum expression of m_rtype, valid for every n >= len(rtype)."""
    if not rtype:
        raise ValueError("empty row type")
    if len(rtype) == 1:
        return PowerSumExpr.symbol(rtype[0])
    alpha0, beta = rtype[0], rtype[1:]
    c, merged = product_expansion(alpha0, beta)
    expr = PowerSumExpr.symbol(alpha0) * monomial_function_expr(beta)
    for g, cg in merged.items():
        expr = expr - monomial_function_expr(g).scale(cg)
    return expr.scale(Fraction(1, c)) if c != 1 else expr


def monomial_decomposition(f: Polynomial) -> Dict[RowType, Fraction]:
    """Coefficients of f in the monomial-function basis (f must be symmetric)."""
    out: Dict[RowType, Fraction] = {}
    for m, c in f.items():
        t = row_type(m, f.k)
        prev = out.get(t)
        if prev is None:
            out[t] = c
        elif prev != c:
            raise NotSymmetricError(f"coefficients within the orbit of type {t} differ")
    return out


def rewrite_in_power_sums(f: Polynomial, w: Sequence[int] | None = None) -> PowerSumExpr:
    """F with f = F((p_alpha)); every symbol satisfies w.alpha <= deg_w(f)."""
    k = f.k
    w = _check_weights(w if w is not None else (1,) * k, k)
    if not is_k_symmetric(f):
        raise NotSymmetricError("polynomial is not k-symmetric")
    decomposition = monomial_decomposition(f)
    total = PowerSumExpr(k)
    # longest types first, matching the elimination order
    for t in sorted(decomposition, key=lambda t: (-len(t), t)):
        c = decomposition[t]
        if not t:
            total = total + PowerSumExpr.constant(c, k)
        else:
            total = total + monomial_function_expr(t).scale(c)
    d = weighted_degree(f, w)
    for z in total.symbols():
        assert sum(a * b for a, b in zip(w, z)) <= d
    return total


# ---------------------------------------------------------------------------
# derivatives of power-sum combinations

def power_sum_gradient_factor(u: Union[PowerSumExpr, Mapping[ExponentTuple, Fraction]],
                              k: int | None = None, w: Sequence[int] | None = None,
                              d: int | None = None) -> List[Polynomial]:
    """q_j in Y_1..Y_k (as shape (1, k) polynomials) with d/dx[i,j] sum u_a p_a = q_j(x[i,.]).

    With ``w`` and ``d`` given, every index must satisfy w.alpha <= d and the
    result is checked to have deg_w(q_j) <= d - w_j.
    """
    if isinstance(u, PowerSumExpr):
        if not u.is_linear():
            raise ValueError("gradient factorization needs a linear combination of power sums")
        k = u.k
        coeffs = {}
        for m, c in u.terms.items():
            if m:
                coeffs[m[0][0]] = c
    else:
        coeffs = {tuple(a): Fraction(c) for a, c in u.items()}
        if k is None:
            k = len(next(iter(coeffs)))
    qs = []
    for j in range(k):
        terms: Dict[Mono, Fraction] = {}
        for alpha, c in coeffs.items():
            if len(alpha) != k:
                raise ValueError(f"index {alpha} does not fit k={k}")
            if alpha[j] == 0 or not c:
                continue
            reduced = list(alpha)
            reduced[j] -= 1
            m = tuple((jj, e) for jj, e in enumerate(reduced) if e)
            terms[m] = terms.get(m, 0) + c * alpha[j]
        qs.append(Polynomial(1, k, terms))
    if d is not None:
        w = _check_weights(w if w is not None else (1,) * k, k)
        for alpha in coeffs:
            if sum(a * b for a, b in zip(w, alpha)) > d:
                raise ValueError(f"index {alpha} has weighted degree above {d}")
        for j, q in enumerate(qs):
            assert weighted_degree(q, w) <= d - w[j]
    return qs


def embed_row(q: Polynomial, row: int, n: int) -> Polynomial:
    """Rename Y_j (shape (1, k)) to x[row, j] in an n-row array (row is 1-based)."""
    k = q.k
    if q.n != 1:
        raise ShapeError("embed_row expects a single-row polynomial")
    off = (row - 1) * k
    return Polynomial._raw(n, k, {tuple((off + v, e) for v, e in m): c for m, c in q.items()})


# ---------------------------------------------------------------------------
# text format

def format_psexpr(F: PowerSumExpr) -> str:
    lines = [f"psexpr k={F.k}"]
    if not F.terms:
        lines.append("0")

    def key(m):
        deg = sum(e for _, e in m)
        return (deg, tuple((z, e) for z, e in m))

    for m in sorted(F.terms, key=key, reverse=True):
        c = F.terms[m]
        toks = [str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"]
        for z, e in m:
            tok = "P[" + ",".join(map(str, z)) + "]"
            toks.append(tok if e == 1 else f"{tok}^{e}")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


_PS_HEADER = re.compile(r"psexpr\s+k=(\d+)$")
_PS_TOKEN = re.compile(r"P\[(\d+(?:,\d+)*)\](?:\^(\d+))?$")


def parse_psexpr(text: str) -> PowerSumExpr:
    lines = list(iter_polynomial_blocks(text))
    if not lines or not _PS_HEADER.match(lines[0][0]):
        raise PolyFormatError("expected 'psexpr k=<k>' header")
    k = int(_PS_HEADER.match(lines[0][0]).group(1))
    terms: Dict[ZMono, Fraction] = {}
    for line, lineno in lines[1:]:
        toks = line.split()
        c = Fraction(toks[0])
        acc: Dict[ExponentTuple, int] = {}
        for tok in toks[1:]:
            mt = _PS_TOKEN.match(tok)
            if not mt:
                raise PolyFormatError(f"line {lineno}: bad token {tok!r}")
            z = tuple(int(x) for x in mt.group(1).split(","))
            if len(z) != k:
                raise PolyFormatError(f"line {lineno}: P index {z} does not have k={k} entries")
            acc[z] = acc.get(z, 0) + int(mt.group(2) or 1)
        m = tuple(sorted(acc.items()))
        terms[m] = terms.get(m, 0) + c
    return PowerSumExpr(k, terms)
