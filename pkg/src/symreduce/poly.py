"""Exact sparse polynomials over an n x k array of variables.

Variables are addressed by 1-based ``(row, col)`` pairs, matching the usual
``x[i,j]`` notation.  Internally a monomial is a tuple of ``(v, e)`` pairs
sorted by the flattened row-major index ``v = (row-1)*k + (col-1)``, with
every exponent ``e >= 1``.  Coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from operator import itemgetter
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

Mono = Tuple[Tuple[int, int], ...]
Scalar = Union[int, Fraction]

#: degree of the zero polynomial
MINUS_INFINITY = float("-inf")

ONE: Mono = ()


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


def mono_degree(m: Mono) -> int:
    return sum(e for _, e in m)


class ShapeError(ValueError):
    """Operands or inputs disagree on the (n, k) variable array."""


class Polynomial:
    """Immutable polynomial with rational coefficients in variables x[i,j]."""

    __slots__ = ("n", "k", "_terms", "_hash")

    def __init__(self, n: int, k: int, terms: Mapping[Mono, Scalar] | None = None):
        if n < 1 or k < 1:
            raise ShapeError(f"shape must be positive, got ({n}, {k})")
        self.n = n
        self.k = k
        clean: Dict[Mono, Fraction] = {}
        nvars = n * k
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            mono = tuple(sorted((v, e) for v, e in mono if e != 0))
            for v, e in mono:
                if not 0 <= v < nvars or e < 0:
                    raise ShapeError(f"bad variable/exponent ({v}, {e}) for shape ({n}, {k})")
            if mono in clean:
                s = clean[mono] + c
                if s:
                    clean[mono] = s
                else:
                    del clean[mono]
            else:
                clean[mono] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, n: int, k: int, terms: Dict[Mono, Fraction]) -> "Polynomial":
        # trusted constructor: terms already canonical
        obj = cls.__new__(cls)
        obj.n, obj.k, obj._terms, obj._hash = n, k, terms, None
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int, k: int) -> "Polynomial":
        return cls._raw(n, k, {})

    @classmethod
    def constant(cls, c: Scalar, n: int, k: int) -> "Polynomial":
        c = Fraction(c)
        return cls._raw(n, k, {ONE: c} if c else {})

    @classmethod
    def var(cls, row: int, col: int, n: int, k: int) -> "Polynomial":
        check_index(row, col, n, k)
        return cls._raw(n, k, {(((row - 1) * k + col - 1, 1),): Fraction(1)})

    @classmethod
    def monomial(cls, exponents: Mapping[Tuple[int, int], int], n: int, k: int,
                 coeff: Scalar = 1) -> "Polynomial":
        """Monomial from a map ``(row, col) -> exponent`` (1-based)."""
        pairs = []
        for (row, col), e in exponents.items():
            check_index(row, col, n, k)
            if e:
                pairs.append(((row - 1) * k + col - 1, e))
        return cls(n, k, {tuple(sorted(pairs)): coeff})

    # -- basic protocol ---------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n, self.k)

    @property
    def terms(self) -> Mapping[Mono, Fraction]:
        return self._terms

    def items(self) -> Iterable[Tuple[Mono, Fraction]]:
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.shape == other.shape and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.k, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.n}, {self.k}, {len(self)} terms: {self.pretty()})"

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Rational)):
            return Polynomial.constant(Fraction(other), self.n, self.k)
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.n, self.k, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.n, self.k, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, c: Scalar) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(self.n, self.k)
        return Polynomial._raw(self.n, self.k, {m: c * v for m, v in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        # iterate over the smaller operand in the outer loop
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        out: Dict[Mono, Fraction] = {}
        for ma, ca in a._terms.items():
            for mb, cb in b._terms.items():
                m = mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(self.n, self.k, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(1, self.n, self.k)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- calculus ---------------------------------------------------------
    def partial(self, row: int, col: int) -> "Polynomial":
        check_index(row, col, self.n, self.k)
        v = (row - 1) * self.k + col - 1
        out: Dict[Mono, Fraction] = {}
        for m, c in self._terms.items():
            for pos, (u, e) in enumerate(m):
                if u == v:
                    if e == 1:
                        nm = m[:pos] + m[pos + 1:]
                    else:
                        nm = m[:pos] + ((u, e - 1),) + m[pos + 1:]
                    out[nm] = c * e
                    break
        return Polynomial._raw(self.n, self.k, out)

    # -- degrees ----------------------------------------------------------
    def degree(self) -> Union[int, float]:
        if not self._terms:
            return MINUS_INFINITY
        return max(mono_degree(m) for m in self._terms)

    def column_degrees(self) -> Tuple[int, ...]:
        """Per column j, the largest total degree of column-j variables in one monomial."""
        degs = [0] * self.k
        for m in self._terms:
            acc = [0] * self.k
            for v, e in m:
                acc[v % self.k] += e
            for j in range(self.k):
                if acc[j] > degs[j]:
                    degs[j] = acc[j]
        return tuple(degs)

    # -- evaluation -------------------------------------------------------
    def __call__(self, x) -> Union[Fraction, float]:
        return evaluate(self, x)

    # -- row action -------------------------------------------------------
    def permute_rows(self, perm: Sequence[int]) -> "Polynomial":
        """Apply a row permutation given 0-based: row i is sent to ``perm[i]``."""
        k = self.k
        out = {}
        for m, c in self._terms.items():
            nm = tuple(sorted((perm[v // k] * k + v % k, e) for v, e in m))
            out[nm] = c
        return Polynomial._raw(self.n, self.k, out)

    def rows_used(self) -> set:
        return {v // self.k for m in self._terms for v, _ in m}

    # -- text -------------------------------------------------------------
    def pretty(self, limit: int = 6) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m in canonical_order(self._terms, self.n * self.k)[:limit]:
            parts.append(_format_term(self._terms[m], m, self.k))
        more = "" if len(self) <= limit else f" + ...({len(self) - limit} more)"
        return " + ".join(parts) + more

    def to_text(self) -> str:
        return format_polynomial(self)


def check_index(row: int, col: int, n: int, k: int) -> None:
    if not (1 <= row <= n and 1 <= col <= k):
        raise ShapeError(f"index x[{row},{col}] outside shape ({n}, {k})")


def dense_exponents(m: Mono, nvars: int) -> Tuple[int, ...]:
    vec = [0] * nvars
    for v, e in m:
        vec[v] = e
    return tuple(vec)


def canonical_order(terms: Iterable[Mono], nvars: int) -> list:
    """Graded lex on the flattened exponent vector, highest first."""
    # comparing ((-v, e), ...) lexicographically is the same as comparing the
    # dense exponent vectors, without building them
    return sorted(terms, key=lambda m: (mono_degree(m), tuple((-v, e) for v, e in m)), reverse=True)


# ---------------------------------------------------------------------------
# functional API

def add(f: Polynomial, g: Polynomial) -> Polynomial:
    f._check(g)
    return f + g


def mul(f: Polynomial, g: Polynomial) -> Polynomial:
    f._check(g)
    return f * g


def partial(f: Polynomial, v: Tuple[int, int]) -> Polynomial:
    return f.partial(*v)


def degree(f: Polynomial) -> Union[int, float]:
    return f.degree()


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def evaluate(f: Polynomial, x) -> Union[Fraction, float]:
    """Evaluate at an n x k array (nested sequences or numpy array).

    All-rational input gives an exact :class:`Fraction`; any float entry
    switches to floating arithmetic.
    """
    rows = [list(r) for r in x]
    if len(rows) != f.n or any(len(r) != f.k for r in rows):
        raise ShapeError(f"point of shape {len(rows)}x{len(rows[0]) if rows else 0} "
                         f"does not match ({f.n}, {f.k})")
    flat = [v for r in rows for v in r]
    if all(_is_exact(v) for v in flat):
        vals = [Fraction(v) for v in flat]
        total = Fraction(0)
    else:
        vals = [float(v) for v in flat]
        total = 0.0
    for m, c in f._terms.items():
        t = c if isinstance(total, Fraction) else float(c)
        for v, e in m:
            t = t * vals[v] ** e
        total += t
    return total


# ---------------------------------------------------------------------------
# canonical text format

_TOKEN = re.compile(r"x\[(\d+),(\d+)\](?:\^(\d+))?$")


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_term(c: Fraction, m: Mono, k: int, cache: Optional[Dict[Tuple[int, int], str]] = None) -> str:
    toks = [_format_coeff(c)]
    for v, e in m:
        tok = cache.get((v, e)) if cache is not None else None
        if tok is None:
            tok = f"x[{v // k + 1},{v % k + 1}]"
            if e != 1:
                tok = f"{tok}^{e}"
            if cache is not None:
                cache[(v, e)] = tok
        toks.append(tok)
    return " ".join(toks)


_U32 = 0xFFFFFFFF


def _byte_key(m: Mono) -> bytes:
    # same order as the canonical_order key, but compared with one memcmp
    parts = [mono_degree(m).to_bytes(4, "big")]
    for v, e in m:
        parts.append((_U32 - v).to_bytes(4, "big"))
        parts.append(e.to_bytes(4, "big"))
    return b"".join(parts)


class TermFormatCache:
    """Memoised sort keys and text for monomials of one shape.

    Worth passing to :func:`format_polynomial` when writing many polynomials
    that share most of their monomials, e.g. the restrictions of one input.
    """

    def __init__(self, k: int, max_entries: int = 500_000):
        self.k = k
        self.max_entries = max_entries
        self.entries: Dict[Mono, Tuple[bytes, str]] = {}

    def get(self, m: Mono) -> Tuple[tuple, str]:
        hit = self.entries.get(m)
        if hit is None:
            if len(self.entries) >= self.max_entries:
                self.entries.clear()
            text = " ".join(f"x[{v // self.k + 1},{v % self.k + 1}]" + (f"^{e}" if e != 1 else "")
                            for v, e in m)
            hit = (_byte_key(m), text)
            self.entries[m] = hit
        return hit


def format_polynomial(f: Polynomial, cache: Optional[TermFormatCache] = None) -> str:
    lines = [f"poly n={f.n} k={f.k}"]
    if f.is_zero():
        lines.append("0")
    if cache is None or cache.k != f.k or f.degree() >= 1 << 32:
        tokens: Dict[Tuple[int, int], str] = {}
        for m in canonical_order(f._terms, f.n * f.k):
            lines.append(_format_term(f._terms[m], m, f.k, tokens))
    else:
        entries, miss = cache.entries, cache.get
        keyed = []
        for m, c in f._terms.items():
            key, text = entries.get(m) or miss(m)
            keyed.append((key, text, c))
        keyed.sort(key=itemgetter(0), reverse=True)
        for _, text, c in keyed:
            coeff = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            lines.append(f"{coeff} {text}" if text else coeff)
    return "\n".join(lines) + "\n"


class PolyFormatError(ValueError):
    pass


def iter_polynomial_blocks(text: str) -> Iterator[Tuple[str, int]]:
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield line, lineno


_HEADER = re.compile(r"poly\s+n=(\d+)\s+k=(\d+)$")


def parse_polynomial(text: str) -> Polynomial:
    """Inverse of :func:`format_polynomial`; ``#`` comment lines are skipped."""
    lines = list(iter_polynomial_blocks(text))
    if not lines:
        raise PolyFormatError("empty polynomial text")
    head, lineno = lines[0]
    mt = _HEADER.match(head)
    if not mt:
        raise PolyFormatError(f"line {lineno}: expected 'poly n=<n> k=<k>' header")
    n, k = int(mt.group(1)), int(mt.group(2))
    terms: Dict[Mono, Fraction] = {}
    for line, lineno in lines[1:]:
        toks = line.split()
        try:
            c = Fraction(toks[0])
        except (ValueError, ZeroDivisionError):
            raise PolyFormatError(f"line {lineno}: bad coefficient {toks[0]!r}") from None
        exps: Dict[int, int] = {}
        for tok in toks[1:]:
            mv = _TOKEN.match(tok)
            if not mv:
                raise PolyFormatError(f"line {lineno}: bad monomial token {tok!r}")
            i, j = int(mv.group(1)), int(mv.group(2))
            e = int(mv.group(3) or 1)
            try:
                check_index(i, j, n, k)
            except ShapeError as exc:
                raise PolyFormatError(f"line {lineno}: {exc}") from None
            v = (i - 1) * k + j - 1
            exps[v] = exps.get(v, 0) + e
        m = tuple(sorted((v, e) for v, e in exps.items() if e))
        terms[m] = terms.get(m, 0) + c
    return Polynomial(n, k, terms)


def lcm_denominator(f: Polynomial) -> int:
    return math.lcm(*(c.denominator for c in f.terms.values())) if len(f) else 1
