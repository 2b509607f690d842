"""Coefficient extraction, zeroness and finiteness for solutions of proper systems.

The verdicts of :func:`eq_alg` and :func:`fin_alg` are exact *relative to the
supplied degree bound* ``D``: a nonzero solution has order at most ``D`` and
an infinite-support solution has a monomial with degree in ``[D+1, D^2+D]``
once ``D`` dominates the true algebraic bound.  The records carry a
``conditional`` flag whenever ``D`` came from the heuristic formula rather
than from the caller.
"""
from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .circuit import (Circuit, CircuitBuilder, DegreeProbe, DEFAULT_PROBE_PRIME, OPS,
                      balance_alternate, degree_probe, degree_reversal_circuit, eval_series,
                      syntactic_degree)
from .poly import Exponents, Polynomial
from .polysys import (PolySystem, kleene_solution, polynomial_approximant, require_proper,
                      stage_for_degree)
from .series import TruncatedSeries

ENGINES = ("hensel", "kleene", "auto")
# beyond this many variables the adjugate circuits dominate; "auto" uses Kleene
AUTO_HENSEL_MAX_VARS = 6
DEFAULT_MAX_MONOMIALS = 2_000_000


# ---------------------------------------------------------------------------
# primes and queries
# ---------------------------------------------------------------------------

def is_probable_prime(n: int, rounds: int = 64, seed: Optional[int] = 0) -> bool:
    """Miller-Rabin with ``rounds`` random bases."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    rng = random.Random(seed)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class CompositeModulusWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CoeffQuery:
    """Target monomial ``X^v`` and modulus ``p``.

    Composite moduli are accepted with a warning: extraction mod any
    ``p >= 2`` is well defined.
    """

    target: Tuple[int, ...]
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "target", tuple(int(e) for e in self.target))
        if any(e < 0 for e in self.target):
            raise ValueError(f"exponents must be nonnegative: {self.target}")
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        if not is_probable_prime(self.modulus):
            warnings.warn(f"modulus {self.modulus} is composite", CompositeModulusWarning)

    @property
    def degree(self) -> int:
        return sum(self.target)


@dataclass(frozen=True)
class BoundConfig:
    """Degree bound ``D``: explicit, or ``d^(c*l^2)`` (heuristic, ``c`` unknown)."""

    mode: str = "explicit"
    D: Optional[int] = None
    c: int = 1

    def __post_init__(self):
        if self.mode not in ("explicit", "formula"):
            raise ValueError(f"unknown bound mode {self.mode!r}")
        if self.mode == "explicit" and (self.D is None or self.D < 1):
            raise ValueError("explicit bound needs D >= 1")
        if self.mode == "formula" and self.c < 1:
            raise ValueError("formula bound needs c >= 1")

    @classmethod
    def explicit(cls, D: int) -> "BoundConfig":
        return cls("explicit", D)

    @classmethod
    def formula(cls, c: int = 1) -> "BoundConfig":
        return cls("formula", None, c)

    @property
    def heuristic(self) -> bool:
        return self.mode == "formula"

    def resolve(self, s: PolySystem) -> int:
        if self.mode == "explicit":
            return self.D
        return max(1, max(s.degree, 1) ** (self.c * s.ell * s.ell))

    def tail_window_top(self, s: PolySystem) -> int:
        D = self.resolve(s)
        return D * D + D


class BoundTooLarge(ValueError):
    """Truncating at the requested degree would need too many monomials."""

    def __init__(self, requested: int, feasible: int, monomials: int):
        self.requested = requested
        self.feasible = feasible
        super().__init__(f"degree {requested} needs {monomials} monomials; "
                         f"largest feasible degree is {feasible}")


def _check_feasible(k: int, n: int, limit: int) -> None:
    need = comb(n + k, k)
    if need <= limit:
        return
    lo = 0
    while comb(lo + 1 + k, k) <= limit:
        lo += 1
    raise BoundTooLarge(n, lo, need)


# ---------------------------------------------------------------------------
# solution expansion
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _hensel_series(s: PolySystem, stage: int, n: int, p: Optional[int], component: int) -> TruncatedSeries:
    return eval_series(polynomial_approximant(s, stage, component), n=n, p=p, indets=s.indets)


def resolve_engine(s: PolySystem, engine: str) -> str:
    if engine == "auto":
        return "hensel" if s.ell <= AUTO_HENSEL_MAX_VARS else "kleene"
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    return engine


def solution_series(s: PolySystem, n: int, engine: str = "hensel", component: int = 0,
                    p: Optional[int] = None) -> TruncatedSeries:
    """Solution component ``A_component`` truncated at total degree ``n``."""
    require_proper(s)
    engine = resolve_engine(s, engine)
    if engine == "hensel":
        return _hensel_series(s, stage_for_degree(n), n, p, component)
    if engine == "kleene":
        a = kleene_solution(s, n)[component]
        if p is None:
            return a
        from .series import series_mod_p
        return series_mod_p(a, p)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def coeff_alg(s: PolySystem, q: CoeffQuery, engine: str = "hensel", component: int = 0) -> int:
    """Coefficient of ``X^v`` in the solution component, reduced mod ``p``.

    Univariate queries are answered from the largest degree the chosen stage
    guarantees (``2^n - 1``) so that runs over many ``v`` share one expansion.
    """
    if len(q.target) != s.k:
        raise ValueError(f"target has {len(q.target)} exponents, system has {s.k} indeterminates")
    n = q.degree
    if s.k == 1:
        n = (1 << stage_for_degree(n)) - 1
    return solution_series(s, n, engine, component, q.modulus).coeff(q.target) % q.modulus


# ---------------------------------------------------------------------------
# zeroness and finiteness
# ---------------------------------------------------------------------------

def monomial_key(exps: Exponents) -> Tuple:
    """Graded order: total degree first, then ascending exponent tuples."""
    return (sum(exps), exps)


@dataclass(frozen=True)
class ZeroVerdict:
    zero: bool
    D: int
    conditional: bool
    witness: Optional[Exponents] = None
    coefficient: Optional[int] = None
    engine: str = "hensel"
    stage: Optional[int] = None

    def to_record(self, indets: Sequence[str]) -> Dict:
        rec = {"problem": "zero", "verdict": "zero" if self.zero else "nonzero",
               "bound": self.D, "conditional": self.conditional, "engine": self.engine}
        if self.stage is not None:
            rec["stage"] = self.stage
        if not self.zero:
            rec["witness"] = list(self.witness)
            rec["monomial"] = Polynomial.monomial(self.witness, indets).to_str()
            rec["coefficient"] = self.coefficient
        else:
            rec["note"] = f"zero up to degree {self.D}"
        return rec


def eq_alg(s: PolySystem, bounds: BoundConfig, engine: str = "hensel", component: int = 0,
           max_monomials: int = DEFAULT_MAX_MONOMIALS) -> ZeroVerdict:
    """Decide whether the solution component vanishes, given the bound ``D``."""
    require_proper(s)
    D = bounds.resolve(s)
    engine = resolve_engine(s, engine)
    _check_feasible(s.k, D, max_monomials)
    a = solution_series(s, D, engine, component)
    stage = stage_for_degree(D) if engine == "hensel" else None
    if a.is_zero():
        return ZeroVerdict(True, D, bounds.heuristic, engine=engine, stage=stage)
    w = min((e for e, _ in a.body.items()), key=monomial_key)
    return ZeroVerdict(False, D, bounds.heuristic, w, a.body.coeff(w), engine, stage)


@dataclass(frozen=True)
class FiniteVerdict:
    finite: bool
    D: int
    window: Tuple[int, int]
    conditional: bool
    degree: Optional[int] = None
    witness: Optional[Exponents] = None
    coefficient: Optional[int] = None
    engine: str = "hensel"

    def to_record(self, indets: Sequence[str]) -> Dict:
        rec = {"problem": "finite", "verdict": "finite" if self.finite else "infinite",
               "bound": self.D, "window": list(self.window),
               "conditional": self.conditional, "engine": self.engine}
        if self.finite:
            rec["degree"] = self.degree
        else:
            rec["witness"] = list(self.witness)
            rec["monomial"] = Polynomial.monomial(self.witness, indets).to_str()
            rec["coefficient"] = self.coefficient
        return rec


def fin_alg(s: PolySystem, bounds: BoundConfig, engine: str = "hensel", component: int = 0,
            max_monomials: int = DEFAULT_MAX_MONOMIALS) -> FiniteVerdict:
    """Finite support iff no monomial of degree in ``[D+1, D^2+D]`` survives."""
    require_proper(s)
    D = bounds.resolve(s)
    top = D * D + D
    engine = resolve_engine(s, engine)
    _check_feasible(s.k, top, max_monomials)
    a = solution_series(s, top, engine, component)
    inside = [e for e, _ in a.body.items() if D < sum(e) <= top]
    if inside:
        w = min(inside, key=monomial_key)
        return FiniteVerdict(False, D, (D + 1, top), bounds.heuristic, None, w,
                             a.body.coeff(w), engine)
    degree = max((sum(e) for e, _ in a.body.items()), default=0)
    return FiniteVerdict(True, D, (D + 1, top), bounds.heuristic, degree, engine=engine)


# ---------------------------------------------------------------------------
# zeroness as a degree question
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionCircuit:
    """Reversal circuit ``f`` with ``A == 0  <=>  deg f <= threshold - 1``."""

    circuit: Circuit
    threshold: int
    Dprime: int
    D: int
    stage: int


def eq_alg_reduction_circuit(s: PolySystem, bounds: BoundConfig, Dprime: Optional[int] = None,
                             component: int = 0) -> ReductionCircuit:
    """Build ``f = (x1...xk)^D' * E(1/x)`` and the threshold ``k D' - D``.

    ``D'`` defaults to the syntactic degree of ``E``, which bounds every
    per-variable degree; any larger value is accepted.
    """
    require_proper(s)
    D = bounds.resolve(s)
    stage = stage_for_degree(D)
    E = polynomial_approximant(s, stage, component)
    if Dprime is None:
        Dprime = syntactic_degree(E)
    f = degree_reversal_circuit(E, Dprime)
    return ReductionCircuit(f, s.k * Dprime - D, Dprime, D, stage)


def probe_reduction(red: ReductionCircuit, p: int = DEFAULT_PROBE_PRIME,
                    seed: Optional[int] = 0) -> DegreeProbe:
    """Monte-Carlo verdict: ``at_most_threshold`` means "zero" (deg f < k D' - D)."""
    return degree_probe(red.circuit, red.threshold - 1, p=p, seed=seed)


# ---------------------------------------------------------------------------
# building systems
# ---------------------------------------------------------------------------

def rename_system(s: PolySystem, mapping: Dict[str, str]) -> PolySystem:
    vars_ = tuple(mapping.get(y, y) for y in s.variables)
    amb = s.indets + vars_
    return PolySystem(s.indets, vars_, [Polynomial(amb, P.terms) for P in s.rhs])


def difference_system(s1: PolySystem, s2: PolySystem, c1: int = 0, c2: int = 0,
                      name: str = "d") -> PolySystem:
    """System whose first component is ``A1[c1] - A2[c2]``.

    The two systems are placed side by side with disjoint variable names and
    a fresh first variable ``d = P1[c1] - P2[c2]``; the result stays proper
    because ``d`` occurs in no right-hand side.
    """
    if s1.indets != s2.indets:
        raise ValueError(f"indeterminates differ: {s1.indets} vs {s2.indets}")
    taken = set(s1.indets)
    r1 = rename_system(s1, {y: _fresh(f"u_{y}", taken) for y in s1.variables})
    r2 = rename_system(s2, {y: _fresh(f"v_{y}", taken) for y in s2.variables})
    head = _fresh(name, taken)
    vars_ = (head,) + r1.variables + r2.variables
    amb = s1.indets + vars_
    rhs = [p.reambient(amb) for p in r1.rhs + r2.rhs]
    diff = r1.rhs[c1].reambient(amb) - r2.rhs[c2].reambient(amb)
    return PolySystem(s1.indets, vars_, [diff] + rhs)


def _fresh(base: str, taken: set) -> str:
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}{i}"
    taken.add(name)
    return name


def slp_to_system(c: Circuit, shift_name: str = "t") -> Tuple[PolySystem, int]:
    """Proper system whose first component is ``t^alpha * c(X)``.

    The circuit is balanced first (levels alternate add/sub and mul).  Every
    leaf ``m`` becomes ``m * t``; every mul gate becomes a variable whose
    equation multiplies the two linear forms feeding it, so each add/sub
    layer merges into the equation of the mul above it.  Add layers keep the
    ``t``-exponent and mul layers double it, hence ``alpha = 2^(mul layers)``.
    """
    taken = set(c.vars)
    t = _fresh(shift_name, taken)
    indets = tuple(c.vars) + (t,)
    g0 = c.gates[c.output]
    if g0[0] not in OPS:
        leaf = Polynomial.var(g0[1], indets) if g0[0] == "input" else Polynomial.const(g0[1], indets)
        y = _fresh("y0", taken)
        amb = indets + (y,)
        return PolySystem(indets, (y,), [(leaf * Polynomial.var(t, indets)).reambient(amb)]), 1

    bc = balance_alternate(c)
    live = bc.live_gates()
    muls = [i for i in live if bc.gates[i][0] == "mul"]
    muls.remove(bc.output)
    order = [bc.output] + muls
    names = {g: _fresh(f"y{j}", taken) for j, g in enumerate(order)}
    amb = indets + tuple(names[g] for g in order)
    tpoly = Polynomial.var(t, amb)
    expr: Dict[int, Polynomial] = {}
    for i in live:
        g = bc.gates[i]
        if g[0] == "input":
            expr[i] = Polynomial.var(g[1], amb) * tpoly
        elif g[0] == "const":
            expr[i] = g[1] * tpoly
        elif g[0] == "add":
            expr[i] = expr[g[1]] + expr[g[2]]
        elif g[0] == "sub":
            expr[i] = expr[g[1]] - expr[g[2]]
        else:
            expr[i] = Polynomial.var(names[i], amb)
    rhs = []
    for g in order:
        _, a, b = bc.gates[g]
        rhs.append(expr[a] * expr[b])
    mul_layers = bc.depth() // 2
    return PolySystem(indets, tuple(names[g] for g in order), rhs), 1 << mul_layers
