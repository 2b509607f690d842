"""Truncated multivariate power series over Z (or Z/p).

A :class:`TruncatedSeries` is a polynomial body together with a total-degree
bound ``N``: all monomials of total degree ``> N`` are unknown.  Zero is
therefore always "zero up to degree N", never an absolute claim.

The heavy lifting is done by :class:`SeriesRing`, a kernel working on a
graded representation: a list indexed by total degree whose entries map a
packed monomial code to its coefficient.  Monomials are packed in base
``N + 1``, so multiplying monomials is integer addition of codes; products
of total degree above ``N`` are skipped by degree before packing could
overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import Exponents, Polynomial

Graded = List[Dict[int, int]]


class PrecisionError(ValueError):
    """Requested order exceeds the precision carried by an operand."""


class NotAUnit(ValueError):
    pass


class SeriesRing:
    """Arithmetic in ``Z[X] / m^(N+1)`` (optionally with coefficients mod p)."""

    __slots__ = ("k", "N", "p", "base", "_weights")

    def __init__(self, k: int, N: int, p: Optional[int] = None):
        if N < 0:
            raise ValueError("truncation order must be >= 0")
        if p is not None and p < 2:
            raise ValueError(f"modulus must be >= 2, got {p}")
        self.k = k
        self.N = N
        self.p = p
        self.base = N + 1
        self._weights = [self.base ** i for i in range(k)]

    def size_estimate(self) -> int:
        """Number of monomials of total degree <= N."""
        return comb(self.N + self.k, self.k)

    # -- packing ------------------------------------------------------------
    def encode(self, exps: Sequence[int]) -> int:
        return sum(e * w for e, w in zip(exps, self._weights))

    def decode(self, code: int) -> Exponents:
        out = []
        for _ in range(self.k):
            code, r = divmod(code, self.base)
            out.append(r)
        return tuple(out)

    def from_terms(self, terms: Dict[Exponents, int]) -> Graded:
        g: Graded = [dict() for _ in range(self.N + 1)]
        p = self.p
        for exps, c in terms.items():
            d = sum(exps)
            if d > self.N:
                continue
            if p is not None:
                c %= p
            if c:
                code = self.encode(exps)
                bucket = g[d]
                bucket[code] = bucket.get(code, 0) + c
        return g

    def to_terms(self, g: Graded) -> Dict[Exponents, int]:
        return {self.decode(code): c for bucket in g for code, c in bucket.items() if c}

    # -- constructors -------------------------------------------------------
    def zero(self) -> Graded:
        return [dict() for _ in range(self.N + 1)]

    def const(self, c: int) -> Graded:
        g = self.zero()
        if self.p is not None:
            c %= self.p
        if c:
            g[0][0] = c
        return g

    def var(self, i: int) -> Graded:
        g = self.zero()
        if self.N >= 1:
            g[1][self._weights[i]] = 1
        return g

    # -- ring operations ----------------------------------------------------
    def _clean(self, bucket: Dict[int, int]) -> Dict[int, int]:
        p = self.p
        if p is None:
            return {c: v for c, v in bucket.items() if v}
        out = {}
        for c, v in bucket.items():
            v %= p
            if v:
                out[c] = v
        return out

    def add(self, a: Graded, b: Graded) -> Graded:
        out = []
        for ba, bb in zip(a, b):
            if not bb:
                out.append(ba)
            elif not ba:
                out.append(bb)
            else:
                m = dict(ba)
                for c, v in bb.items():
                    m[c] = m.get(c, 0) + v
                out.append(self._clean(m))
        return out

    def neg(self, a: Graded) -> Graded:
        if self.p is None:
            return [{c: -v for c, v in b.items()} for b in a]
        p = self.p
        return [{c: p - v for c, v in b.items()} for b in a]

    def sub(self, a: Graded, b: Graded) -> Graded:
        return self.add(a, self.neg(b))

    def scale(self, a: Graded, s: int) -> Graded:
        return [self._clean({c: v * s for c, v in b.items()}) for b in a]

    def mul(self, a: Graded, b: Graded) -> Graded:
        N = self.N
        out: Graded = [dict() for _ in range(N + 1)]
        nz_b = [(d, bb) for d, bb in enumerate(b) if bb]
        for d1, ba in enumerate(a):
            if not ba:
                continue
            items_a = list(ba.items())
            for d2, bb in nz_b:
                d = d1 + d2
                if d > N:
                    break
                o = out[d]
                items_b = list(bb.items())
                for c1, v1 in items_a:
                    for c2, v2 in items_b:
                        c = c1 + c2
                        o[c] = o.get(c, 0) + v1 * v2
        return [self._clean(o) if o else o for o in out]

    def mul_term(self, a: Graded, exps: Sequence[int], coeff: int) -> Graded:
        """Multiply by the single term ``coeff * X^exps``."""
        shift_d = sum(exps)
        shift_c = self.encode(exps)
        out: Graded = [dict() for _ in range(self.N + 1)]
        for d in range(self.N + 1 - shift_d):
            if a[d]:
                out[d + shift_d] = self._clean({c + shift_c: v * coeff for c, v in a[d].items()})
        return out

    def is_zero(self, a: Graded) -> bool:
        return not any(a)

    def constant_term(self, a: Graded) -> int:
        return a[0].get(0, 0)

    def order(self, a: Graded) -> Optional[int]:
        for d, b in enumerate(a):
            if b:
                return d
        return None

    def truncate(self, a: Graded, n: int) -> Graded:
        """Zero out every degree above ``n`` (keeps the list length)."""
        return [b if d <= n else {} for d, b in enumerate(a)]


@dataclass(frozen=True)
class Valuation:
    """Order of a truncated series.

    ``at_least`` marks a lower bound: a truncated zero only tells us that
    the order is at least ``order_bound + 1``.
    """

    value: int
    at_least: bool = False

    def __str__(self) -> str:
        return f">= {self.value}" if self.at_least else str(self.value)


class TruncatedSeries:
    """Immutable element of ``Z[[X]]`` known modulo ``m^(N+1)``."""

    __slots__ = ("body", "order_bound")

    def __init__(self, body: Polynomial, order_bound: int):
        if order_bound < 0:
            raise ValueError("order_bound must be >= 0")
        if body.total_degree() > order_bound:
            body = Polynomial(body.ambient, {e: c for e, c in body.items() if sum(e) <= order_bound})
        self.body = body
        self.order_bound = order_bound

    @property
    def indets(self) -> Tuple[str, ...]:
        return self.body.ambient

    @classmethod
    def from_graded(cls, ring: SeriesRing, g: Graded, indets: Sequence[str]) -> "TruncatedSeries":
        return cls(Polynomial(indets, ring.to_terms(g)), ring.N)

    def graded(self, ring: SeriesRing) -> Graded:
        return ring.from_terms(dict(self.body.items()))

    @classmethod
    def var(cls, name: str, indets: Sequence[str], order_bound: int) -> "TruncatedSeries":
        return cls(Polynomial.var(name, indets), order_bound)

    @classmethod
    def const(cls, c: int, indets: Sequence[str], order_bound: int) -> "TruncatedSeries":
        return cls(Polynomial.const(c, indets), order_bound)

    def coeff(self, exps: Exponents) -> int:
        if sum(exps) > self.order_bound:
            raise PrecisionError(f"degree {sum(exps)} beyond order bound {self.order_bound}")
        return self.body.coeff(exps)

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order_bound, other.order_bound)
        return TruncatedSeries(self.body + other.body, n)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order_bound, other.order_bound)
        return TruncatedSeries(self.body - other.body, n)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self.body, self.order_bound)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_trunc_mul(self, other, min(self.order_bound, other.order_bound))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order_bound == other.order_bound and self.body == other.body

    def __hash__(self) -> int:
        return hash((self.body, self.order_bound))

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.body.to_str()!r} + O(deg {self.order_bound + 1}))"


def _ring_for(*series: TruncatedSeries, n: int, p: Optional[int] = None) -> SeriesRing:
    ambient = series[0].indets
    for s in series[1:]:
        if s.indets != ambient:
            raise ValueError(f"indeterminate mismatch: {ambient} vs {s.indets}")
    return SeriesRing(len(ambient), n, p)


def series_trunc_mul(a: TruncatedSeries, b: TruncatedSeries, n: int) -> TruncatedSeries:
    if n > min(a.order_bound, b.order_bound):
        raise PrecisionError(
            f"requested order {n} exceeds operand precision {min(a.order_bound, b.order_bound)}")
    ring = _ring_for(a, b, n=n)
    return TruncatedSeries.from_graded(ring, ring.mul(a.graded(ring), b.graded(ring)), a.indets)


def series_invert_unit(u: TruncatedSeries, n: int) -> TruncatedSeries:
    """Inverse of a unit ``+-1 + f`` (``f`` quasiregular) modulo degree ``n + 1``.

    Uses the geometric series ``(1 - g)^-1 = sum g^j`` with ``n + 1`` terms
    evaluated Horner-style.
    """
    if n > u.order_bound:
        raise PrecisionError(f"requested order {n} exceeds operand precision {u.order_bound}")
    c0 = u.body.constant_term()
    if c0 not in (1, -1):
        raise NotAUnit(f"constant term {c0} is not +-1")
    ring = _ring_for(u, n=n)
    # u = c0 * (1 - g)  =>  u^-1 = c0 * sum g^j
    g = ring.sub(ring.const(1), ring.scale(u.graded(ring), c0))
    acc = ring.const(1)
    for _ in range(n):
        acc = ring.add(ring.const(1), ring.mul(g, acc))
    return TruncatedSeries.from_graded(ring, ring.scale(acc, c0), u.indets)


def ord_(f: TruncatedSeries) -> Valuation:
    """Least total degree of a nonzero term (lower-bound marker for zero)."""
    if f.body.is_zero():
        return Valuation(f.order_bound + 1, at_least=True)
    return Valuation(min(sum(e) for e, _ in f.body.items()))


def tail(f: TruncatedSeries, D: int) -> TruncatedSeries:
    """Delete all monomials of total degree at most ``D``."""
    if D > f.order_bound:
        raise PrecisionError(f"D={D} exceeds order bound {f.order_bound}")
    body = Polynomial(f.indets, {e: c for e, c in f.body.items() if sum(e) > D})
    return TruncatedSeries(body, f.order_bound)


def series_mod_p(f: TruncatedSeries, p: int) -> TruncatedSeries:
    from .poly import reduce_mod_p

    return TruncatedSeries(reduce_mod_p(f.body, p), f.order_bound)


def compose_univariate(poly_coeffs: Sequence[int], a: TruncatedSeries) -> TruncatedSeries:
    """Evaluate ``sum c_i t^i`` at the series ``a`` (Horner)."""
    ring = _ring_for(a, n=a.order_bound)
    ag = a.graded(ring)
    acc = ring.zero()
    for c in reversed(list(poly_coeffs)):
        acc = ring.add(ring.mul(acc, ag), ring.const(c))
    return TruncatedSeries.from_graded(ring, acc, a.indets)
