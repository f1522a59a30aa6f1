"""Partitions of n and the block substitution onto subspaces of A_l.

A partition lam = (lam_1 >= ... >= lam_l) of n names the subspace where the
first lam_1 rows equal y_1, the next lam_2 rows equal y_2, and so on.
Restricting a polynomial to it gives a polynomial in l*k variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .bounds import KappaBound, count_partitions
from .multisym import PowerSumExpr, is_k_symmetric, rewrite_in_power_sums
from .poly import (Mono, Polynomial, ShapeError, TermFormatCache, format_polynomial,
                   parse_polynomial)

Partition = Tuple[int, ...]


def check_partition(lam: Sequence[int], n: Optional[int] = None) -> Partition:
    lam = tuple(int(x) for x in lam)
    if not lam or any(x < 1 for x in lam):
        raise ValueError(f"partition parts must be positive: {lam}")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"partition must be nonincreasing: {lam}")
    if n is not None and sum(lam) != n:
        raise ValueError(f"partition {lam} does not sum to {n}")
    return lam


def enumerate_partitions(n: int, ell: int) -> Iterator[Partition]:
    """Partitions of n into exactly ell parts, in decreasing lexicographic order."""
    if not 1 <= ell <= n:
        raise ValueError(f"need 1 <= ell <= n, got n={n}, ell={ell}")

    def rec(total: int, parts: int, cap: int) -> Iterator[Partition]:
        if parts == 1:
            if total <= cap:
                yield (total,)
            return
        # the first part must leave at least one per remaining part
        hi = min(cap, total - (parts - 1))
        lo = -(-total // parts)
        for first in range(hi, lo - 1, -1):
            for rest in rec(total - first, parts - 1, first):
                yield (first,) + rest

    yield from rec(n, ell, n)


def enumerate_subspaces_up_to(n: int, m: int) -> Iterator[Partition]:
    """One partition per S_n-orbit of subspaces in A_m: l = 1..m, each in decreasing lex order."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    for ell in range(1, m + 1):
        yield from enumerate_partitions(n, ell)


def block_of_rows(lam: Partition) -> List[int]:
    out = []
    for c, size in enumerate(lam):
        out.extend([c] * size)
    return out


@dataclass(frozen=True)
class ReducedInstance:
    lam: Partition
    q: Polynomial
    provenance: str = ""

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return self.lam

    def sphere_weights(self) -> List[int]:
        """Per-variable weights so that sum(w * y^2) = r pulls back the sphere B_r."""
        k = self.q.k
        return [self.lam[v // k] for v in range(self.q.n * k)]

    def to_text(self, cache: Optional[TermFormatCache] = None) -> str:
        head = "lambda = (" + ",".join(map(str, self.lam)) + ")\n"
        prov = f"# source: {self.provenance}\n" if self.provenance else ""
        return head + prov + format_polynomial(self.q, cache)


def parse_reduced_instance(text: str) -> ReducedInstance:
    lines = text.splitlines()
    head = lines[0].strip()
    if not head.startswith("lambda"):
        raise ValueError("expected 'lambda = (...)' header")
    inner = head.split("=", 1)[1].strip().strip("()")
    lam = check_partition([int(x) for x in inner.split(",") if x.strip()])
    prov = ""
    for line in lines[1:]:
        if line.startswith("# source:"):
            prov = line.split(":", 1)[1].strip()
    return ReducedInstance(lam, parse_polynomial("\n".join(lines[1:])), prov)


def expand_point(y, lam: Partition):
    """Repeat row c of y lam_c times (the inverse of the block substitution)."""
    rows = [list(r) for r in y]
    if len(rows) != len(lam):
        raise ShapeError(f"point has {len(rows)} rows, partition has {len(lam)} parts")
    return [list(rows[c]) for c in block_of_rows(lam)]


def restrict(f: Polynomial, lam: Sequence[int], provenance: str = "") -> ReducedInstance:
    """Substitute x[i,.] -> y[c(i),.] with contiguous blocks of sizes lam."""
    n, k = f.shape
    lam = check_partition(lam, n)
    blocks = block_of_rows(lam)
    out: Dict[Mono, Fraction] = {}
    for m, c in f.items():
        acc: Dict[int, int] = {}
        for v, e in m:
            u = blocks[v // k] * k + v % k
            acc[u] = acc.get(u, 0) + e
        mono = tuple(sorted(acc.items()))
        s = out.get(mono, 0) + c
        if s:
            out[mono] = s
        else:
            out.pop(mono, None)
    return ReducedInstance(lam, Polynomial._raw(len(lam), k, out), provenance)


def weighted_power_sum(alpha: Sequence[int], lam: Partition) -> Polynomial:
    """sum_c lam_c * y[c,.]^alpha, the restriction of p_alpha."""
    ell, k = len(lam), len(alpha)
    terms = {}
    for c, size in enumerate(lam):
        terms[tuple((c * k + j, a) for j, a in enumerate(alpha) if a)] = Fraction(size)
    return Polynomial._raw(ell, k, terms)


class Restrictor:
    """Restrict one polynomial to many partitions.

    Symmetric inputs are rewritten in power sums once; each restriction is
    then F evaluated at the weighted power sums, which is far cheaper than
    substituting every monomial of a large polynomial.
    """

    def __init__(self, f: Polynomial, provenance: str = "", use_power_sums: Optional[bool] = None):
        self.f = f
        self.provenance = provenance
        if use_power_sums is None:
            use_power_sums = len(f) > 200 and is_k_symmetric(f)
        self.expr: Optional[PowerSumExpr] = rewrite_in_power_sums(f) if use_power_sums else None
        self._memo: dict = {}

    def __call__(self, lam: Sequence[int]) -> ReducedInstance:
        if self.expr is None:
            return restrict(self.f, lam, self.provenance)
        lam = check_partition(lam, self.f.n)
        q = self.expr.substitute(lambda a: weighted_power_sum(a, lam), len(lam), self.f.k, self._memo)
        return ReducedInstance(lam, q, self.provenance)


def reduction_plan(f: Polynomial, bound, maximal_only: bool = False,
                   provenance: str = "") -> Iterator[ReducedInstance]:
    """Lazily restrict f to every subspace of A_m, m = the bound's value (capped at n).

    With ``maximal_only`` only partitions with exactly m parts are produced;
    every smaller subspace lies inside one of those.
    """
    m = bound.value if isinstance(bound, KappaBound) else int(bound)
    m = min(m, f.n)
    restrictor = Restrictor(f, provenance)
    parts = enumerate_partitions(f.n, m) if maximal_only else enumerate_subspaces_up_to(f.n, m)
    for lam in parts:
        yield restrictor(lam)


def plan_size(n: int, m: int, maximal_only: bool = False) -> int:
    m = min(m, n)
    if maximal_only:
        return count_partitions(n, m)
    return sum(count_partitions(n, ell) for ell in range(1, m + 1))
