"""Proper polynomial systems ``y_i = P_i(X, Y)`` and their quasiregular solution.

Two independent engines compute the solution:

* :func:`kleene_solve` iterates ``A <- P(A)`` in truncated arithmetic.  For a
  proper system every iteration raises the order of the error by at least
  one, because each monomial of ``Y``-degree <= 1 carries an ``X``-factor
  and every monomial of ``Y``-degree >= 2 multiplies two errors (or an
  error by a quasiregular iterate).  Hence ``n + 1`` iterations fix every
  coefficient of total degree <= n.

* :func:`hensel_step` runs Newton's iteration
  ``a <- a - adj(Df(a)) f(a) / det(Df(a))`` on rational approximants
  ``g_i / (1 - h_i)`` kept as circuits.  The order of the error doubles at
  each stage; :func:`polynomial_approximant` truncates the geometric series
  of the denominator to get a division-free circuit ``E_n`` that agrees
  with the solution below degree ``2^n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .circuit import (Circuit, CircuitBuilder, det_and_adjugate_gates, determinant_gates,
                      eval_exact, eval_graded, geometric_sum_gates)
from .poly import Exponents, ParseError, Polynomial, parse_polynomial
from .series import Graded, SeriesRing, TruncatedSeries, series_invert_unit


class ImproperSystem(ValueError):
    pass


class NotAJacobianUnit(ArithmeticError):
    """The Jacobian denominator lost its unit constant term."""


class PolySystem:
    """A system ``y_i = P_i`` with ``P_i`` in ``Z[X][Y]``.

    Right-hand sides live over the joint ambient ``indets + variables``.
    """

    __slots__ = ("indets", "variables", "rhs", "_hash")

    def __init__(self, indets: Sequence[str], variables: Sequence[str], rhs: Sequence[Polynomial]):
        self.indets = tuple(indets)
        self.variables = tuple(variables)
        if set(self.indets) & set(self.variables):
            raise ValueError("indeterminates and variables must be disjoint")
        if len(rhs) != len(self.variables):
            raise ValueError(f"{len(self.variables)} variables but {len(rhs)} equations")
        amb = self.ambient
        self.rhs = tuple(p if p.ambient == amb else p.reambient(amb) for p in rhs)
        self._hash = None

    @property
    def ambient(self) -> Tuple[str, ...]:
        return self.indets + self.variables

    @property
    def k(self) -> int:
        return len(self.indets)

    @property
    def ell(self) -> int:
        return len(self.variables)

    @property
    def degree(self) -> int:
        """Largest total degree (in X and Y jointly) of a right-hand side."""
        return max((p.total_degree() for p in self.rhs), default=0)

    @property
    def size(self) -> int:
        return sum(len(p) for p in self.rhs)

    def split(self, exps: Exponents) -> Tuple[Exponents, Exponents]:
        return exps[:self.k], exps[self.k:]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySystem):
            return NotImplemented
        return (self.indets, self.variables, self.rhs) == (other.indets, other.variables, other.rhs)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.indets, self.variables, self.rhs))
        return self._hash

    def __repr__(self) -> str:
        return f"PolySystem(indets={self.indets}, variables={self.variables})"

    def to_text(self) -> str:
        lines = ["vars: " + " ".join(self.variables), "indets: " + " ".join(self.indets)]
        lines += [f"{y} = {p.to_str()}" for y, p in zip(self.variables, self.rhs)]
        return "\n".join(lines) + "\n"


def parse_system(text: str) -> PolySystem:
    """Read the ``vars:`` / ``indets:`` / ``y = expr`` format."""
    variables = indets = None
    eqs: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            variables = line[5:].split()
        elif line.startswith("indets:"):
            indets = line[7:].split()
        elif "=" in line:
            lhs, rhs = line.split("=", 1)
            lhs = lhs.strip()
            if lhs in eqs:
                raise ParseError(f"line {lineno}: second equation for {lhs!r}")
            eqs[lhs] = rhs.strip()
        else:
            raise ParseError(f"line {lineno}: cannot parse {raw!r}")
    if variables is None or indets is None:
        raise ParseError("system needs both 'vars:' and 'indets:' headers")
    missing = [y for y in variables if y not in eqs]
    extra = [y for y in eqs if y not in variables]
    if missing or extra:
        raise ParseError(f"equations do not match vars (missing {missing}, unknown {extra})")
    amb = tuple(indets) + tuple(variables)
    return PolySystem(indets, variables, [parse_polynomial(eqs[y], amb) for y in variables])


@dataclass(frozen=True)
class ProperReport:
    ok: bool
    violations: Tuple[Tuple[str, str], ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "proper"
        return "; ".join(f"equation {y}: monomial {m} has a constant coefficient"
                         for y, m in self.violations)


def validate_proper(s: PolySystem) -> ProperReport:
    """Every Y-monomial of degree <= 1 must have a coefficient without constant term."""
    bad = []
    for y, p in zip(s.variables, s.rhs):
        for exps, _ in p.sorted_terms():
            xe, ye = s.split(exps)
            if sum(ye) <= 1 and sum(xe) == 0:
                mono = "*".join(v for v, e in zip(s.variables, ye) if e) or "1"
                bad.append((y, mono))
    return ProperReport(not bad, tuple(bad))


def require_proper(s: PolySystem) -> None:
    rep = validate_proper(s)
    if not rep:
        raise ImproperSystem(rep.describe())


# ---------------------------------------------------------------------------
# substitution in the graded kernel
# ---------------------------------------------------------------------------

def substitute_graded(s: PolySystem, p: Polynomial, ring: SeriesRing,
                      values: Sequence[Graded], powers: Optional[List[Dict[int, Graded]]] = None) -> Graded:
    """``p(X, a)`` in the kernel, with power caches shared across calls."""
    if powers is None:
        powers = [dict() for _ in values]
    acc = ring.zero()
    for exps, c in p.items():
        xe, ye = s.split(exps)
        if sum(xe) > ring.N:
            continue
        term = None
        for j, e in enumerate(ye):
            if e:
                pw = _power(ring, values[j], e, powers[j])
                term = pw if term is None else ring.mul(term, pw)
        term = ring.const(1) if term is None else term
        acc = ring.add(acc, ring.mul_term(term, xe, c))
    return acc


def _power(ring: SeriesRing, a: Graded, e: int, cache: Dict[int, Graded]) -> Graded:
    if e == 1:
        return a
    if e not in cache:
        half = _power(ring, a, e // 2, cache)
        sq = ring.mul(half, half)
        cache[e] = ring.mul(sq, a) if e % 2 else sq
    return cache[e]


def kleene_solve(s: PolySystem, n: int, iterations: Optional[int] = None,
                 p: Optional[int] = None) -> List[TruncatedSeries]:
    """Truncations to degree ``n`` of the quasiregular solution.

    Runs ``n + 1`` iterations unless told otherwise, stopping early at a
    truncated fixed point (systems whose variables depend acyclically on
    each other reach one after a few steps).  Iterate ``m`` is exact below
    degree ``m``, so it is cut at degree ``m`` before being fed back.
    """
    require_proper(s)
    ring = SeriesRing(s.k, n, p)
    A = [ring.zero() for _ in s.variables]
    steps = n + 1 if iterations is None else iterations
    for m in range(steps):
        cut = [ring.truncate(a, m) for a in A] if m < n else A
        powers = [dict() for _ in A]
        new = [substitute_graded(s, P, ring, cut, powers) for P in s.rhs]
        # a truncated fixed point is the solution (the map contracts)
        stable = iterations is None and new == A and cut == A
        A = new
        if stable:
            break
    return [TruncatedSeries.from_graded(ring, a, s.indets) for a in A]


@lru_cache(maxsize=64)
def _kleene_cached(s: PolySystem, n: int) -> Tuple[TruncatedSeries, ...]:
    return tuple(kleene_solve(s, n))


def kleene_solution(s: PolySystem, n: int) -> Tuple[TruncatedSeries, ...]:
    """Memoized :func:`kleene_solve` (systems are immutable and hashable)."""
    return _kleene_cached(s, n)


def residual(s: PolySystem, a: Sequence[TruncatedSeries]) -> List[TruncatedSeries]:
    """``f(a) = a - P(a)`` truncated at the common precision of ``a``."""
    n = min(x.order_bound for x in a)
    ring = SeriesRing(s.k, n)
    vals = [x.graded(ring) for x in a]
    powers = [dict() for _ in vals]
    out = []
    for i, P in enumerate(s.rhs):
        out.append(TruncatedSeries.from_graded(
            ring, ring.sub(vals[i], substitute_graded(s, P, ring, vals, powers)), s.indets))
    return out


def derivative_matrix(s: PolySystem) -> List[List[Polynomial]]:
    """``Df[i][j] = d(y_i - P_i) / d y_j``."""
    amb = s.ambient
    rows = []
    for i, P in enumerate(s.rhs):
        f = Polynomial.var(s.variables[i], amb) - P
        rows.append([f.derivative(y) for y in s.variables])
    return rows


def jacobian_at(s: PolySystem, a: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """``det Df(a)`` as a truncated series."""
    n = min(x.order_bound for x in a)
    ring = SeriesRing(s.k, n)
    vals = [x.graded(ring) for x in a]
    powers = [dict() for _ in vals]
    entries = [[substitute_graded(s, d, ring, vals, powers) for d in row]
               for row in derivative_matrix(s)]
    names = [f"m{i}_{j}" for i in range(s.ell) for j in range(s.ell)]
    b = CircuitBuilder(names, fold=False)
    M = [[b.input(f"m{i}_{j}") for j in range(s.ell)] for i in range(s.ell)]
    det = b.build(determinant_gates(b, M))
    leaves = {f"m{i}_{j}": entries[i][j] for i in range(s.ell) for j in range(s.ell)}
    return TruncatedSeries.from_graded(ring, eval_graded(det, ring, leaves)[0], s.indets)


# ---------------------------------------------------------------------------
# Newton / Hensel iteration on circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalApproximant:
    """Stage-``n`` iterate ``a_i = g_i / (1 - h_i)`` stored as circuits.

    All numerators and denominator tails index into one shared gate list.
    """

    system: PolySystem
    stage: int
    gates: Tuple = field(repr=False)
    numerator_gates: Tuple[int, ...]
    tail_gates: Tuple[int, ...]

    @property
    def numerators(self) -> List[Circuit]:
        return [Circuit(self.system.indets, self.gates, g) for g in self.numerator_gates]

    @property
    def denominator_tails(self) -> List[Circuit]:
        return [Circuit(self.system.indets, self.gates, h) for h in self.tail_gates]

    def base_circuit(self) -> Circuit:
        return Circuit(self.system.indets, self.gates, 0)

    def expand(self, n: int, p: Optional[int] = None) -> List[TruncatedSeries]:
        """Debug path: the series ``g_i * (1 - h_i)^-1`` up to degree ``n``."""
        ring = SeriesRing(self.system.k, n, p)
        c = self.base_circuit()
        leaves = {x: ring.var(i) for i, x in enumerate(self.system.indets)}
        vals = eval_graded(c, ring, leaves, list(self.numerator_gates) + list(self.tail_gates))
        l = self.system.ell
        out = []
        for i in range(l):
            g = TruncatedSeries.from_graded(ring, vals[i], self.system.indets)
            h = TruncatedSeries.from_graded(ring, vals[l + i], self.system.indets)
            q = TruncatedSeries.const(1, self.system.indets, n) - h
            out.append(g * series_invert_unit(q, n))
        return out

    def check_tails(self) -> None:
        """Each ``h_i`` must vanish at ``X = 0``."""
        zero = {x: 0 for x in self.system.indets}
        for i, h in enumerate(eval_exact(self.base_circuit(), zero, self.tail_gates)):
            if h != 0:
                raise NotAJacobianUnit(f"denominator tail {i} has constant term {h}")


def initial_approximant(s: PolySystem) -> RationalApproximant:
    b = CircuitBuilder(s.indets)
    zero = b.const(0)
    l = s.ell
    return RationalApproximant(s, 0, tuple(b.gates), (zero,) * l, (zero,) * l)


def _y_degree_bounds(s: PolySystem) -> List[int]:
    """Largest exponent of each variable in any ``f_i = y_i - P_i``."""
    bounds = [1] * s.ell
    for P in s.rhs:
        for exps, _ in P.items():
            _, ye = s.split(exps)
            for j, e in enumerate(ye):
                bounds[j] = max(bounds[j], e)
    return bounds


def hensel_step(s: PolySystem, cur: RationalApproximant) -> RationalApproximant:
    """One Newton step, built from circuits only.

    With ``q_j = 1 - h_j`` and ``Q = prod q_j^delta_j`` (``delta_j`` the
    largest ``y_j``-degree) every ``f_i(a)`` and ``Df(a)_ij`` becomes a
    polynomial numerator over the common denominator ``Q``:
    ``f(a) = F/Q`` and ``Df(a) = M/Q``.  Newton's update then reads::

        a'_i = (g_i det M - q_i (adj(M) F)_i) / (q_i det M)

    and ``det M`` has constant term ``J_f(0) = 1``, so the new tail is
    ``h'_i = 1 - q_i det M``.
    """
    if cur.system != s:
        raise ValueError("approximant belongs to a different system")
    b = CircuitBuilder(s.indets, base=cur.base_circuit())
    l = s.ell
    g = list(cur.numerator_gates)
    one = b.const(1)
    q = [b.sub(one, h) for h in cur.tail_gates]
    delta = _y_degree_bounds(s)
    g_pow = [dict() for _ in range(l)]
    q_pow = [dict() for _ in range(l)]
    x_pow = [dict() for _ in s.indets]
    xs = [b.input(x) for x in s.indets]

    def numerator(f: Polynomial) -> int:
        terms = []
        for exps, c in f.sorted_terms():
            xe, ye = s.split(exps)
            factors = [b.power(xs[t], e, x_pow[t]) for t, e in enumerate(xe) if e]
            for j in range(l):
                if ye[j]:
                    factors.append(b.power(g[j], ye[j], g_pow[j]))
                if delta[j] - ye[j]:
                    factors.append(b.power(q[j], delta[j] - ye[j], q_pow[j]))
            terms.append(b.mul(b.const(c), b.product(factors)))
        return b.sum(terms)

    amb = s.ambient
    fs = [Polynomial.var(y, amb) - P for y, P in zip(s.variables, s.rhs)]
    F = [numerator(f) for f in fs]
    M = [[numerator(f.derivative(y)) for y in s.variables] for f in fs]
    det, adj = det_and_adjugate_gates(b, M)
    zero_pt = {x: 0 for x in s.indets}
    d0 = eval_exact(b.build(det), zero_pt)
    if d0 != 1:
        raise NotAJacobianUnit(f"Jacobian numerator has constant term {d0}, expected 1")
    new_g, new_h = [], []
    for i in range(l):
        correction = b.sum([b.mul(adj[i][j], F[j]) for j in range(l)])
        new_g.append(b.sub(b.mul(g[i], det), b.mul(q[i], correction)))
        new_h.append(b.sub(one, b.mul(q[i], det)))
    nxt = RationalApproximant(s, cur.stage + 1, tuple(b.gates), tuple(new_g), tuple(new_h))
    nxt.check_tails()
    return nxt


@lru_cache(maxsize=64)
def rational_approximant(s: PolySystem, n: int) -> RationalApproximant:
    """Stage-``n`` Newton iterate from ``a_0 = 0`` (memoized)."""
    if n < 0:
        raise ValueError("stage must be >= 0")
    require_proper(s)
    if n == 0:
        return initial_approximant(s)
    return hensel_step(s, rational_approximant(s, n - 1))


@lru_cache(maxsize=128)
def polynomial_approximant(s: PolySystem, n: int, component: int = 0) -> Circuit:
    """Circuit ``E_n = g_n * sum_{j < 2^n} h_n^j`` for one solution component.

    Agrees with the solution on every monomial of total degree ``< 2^n``.
    """
    ra = rational_approximant(s, n)
    b = CircuitBuilder(s.indets, base=ra.base_circuit())
    geo = geometric_sum_gates(b, ra.tail_gates[component], (1 << n) - 1)
    return b.build(b.mul(ra.numerator_gates[component], geo)).compact()


def stage_for_degree(D: int) -> int:
    """Smallest ``n`` with ``2^n >= D + 1``."""
    if D < 0:
        raise ValueError("degree must be >= 0")
    return D.bit_length()
