"""Sparse multivariate polynomials with exact integer coefficients.

A :class:`Polynomial` lives in an *ambient* ring ``Z[s1, ..., sk]`` fixed by an
ordered tuple of symbol names.  Terms are stored as a mapping from exponent
tuples to nonzero Python integers, so coefficients never overflow.
"""
from __future__ import annotations

import ast
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

Exponents = Tuple[int, ...]


class AmbientMismatch(ValueError):
    """Raised when combining polynomials over different symbol lists."""


class Polynomial:
    """Immutable sparse polynomial over an ordered list of symbols.

    >>> x = Polynomial.var("x", ("x",))
    >>> (x + 1) * (x + 1)
    Polynomial('x^2 + 2*x + 1', ambient=('x',))
    """

    __slots__ = ("ambient", "_terms", "_hash")

    def __init__(self, ambient: Sequence[str], terms: Optional[Mapping[Exponents, int]] = None):
        self.ambient: Tuple[str, ...] = tuple(ambient)
        if len(set(self.ambient)) != len(self.ambient):
            raise ValueError(f"duplicate symbols in ambient {self.ambient}")
        clean: Dict[Exponents, int] = {}
        k = len(self.ambient)
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != k or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for ambient {self.ambient}")
            if coeff:
                clean[exps] = clean.get(exps, 0) + int(coeff)
        self._terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, ambient: Sequence[str]) -> "Polynomial":
        return cls(ambient)

    @classmethod
    def const(cls, c: int, ambient: Sequence[str]) -> "Polynomial":
        return cls(ambient, {(0,) * len(tuple(ambient)): c})

    @classmethod
    def var(cls, name: str, ambient: Sequence[str]) -> "Polynomial":
        ambient = tuple(ambient)
        exps = tuple(1 if s == name else 0 for s in ambient)
        if sum(exps) != 1:
            raise KeyError(f"{name!r} not in ambient {ambient}")
        return cls(ambient, {exps: 1})

    @classmethod
    def monomial(cls, exps: Exponents, ambient: Sequence[str], coeff: int = 1) -> "Polynomial":
        return cls(ambient, {tuple(exps): coeff})

    # -- basic accessors ----------------------------------------------------
    @property
    def terms(self) -> Dict[Exponents, int]:
        """A copy of the term map."""
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, exps: Exponents) -> int:
        return self._terms.get(tuple(exps), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def total_degree(self) -> int:
        """Largest total degree of a term; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ambient.index(name)
        return max((e[i] for e in self._terms), default=-1)

    def constant_term(self) -> int:
        return self._terms.get((0,) * len(self.ambient), 0)

    # -- ring operations ----------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.ambient != other.ambient:
            raise AmbientMismatch(f"{self.ambient} != {other.ambient}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, int):
            return Polynomial.const(other, self.ambient)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.ambient, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.ambient, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Exponents, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.ambient, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.const(1, self.ambient)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Polynomial.const(other, self.ambient)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ambient == other.ambient and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ambient, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and substitution -------------------------------------------
    def derivative(self, name: str) -> "Polynomial":
        i = self.ambient.index(name)
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Polynomial(self.ambient, out)

    def evaluate(self, point: Mapping[str, int], modulus: Optional[int] = None) -> int:
        vals = [point[s] for s in self.ambient]
        total = 0
        for e, c in self._terms.items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t *= pow(v, k, modulus) if modulus else v ** k
            total += t
        return total % modulus if modulus else total

    def reambient(self, ambient: Sequence[str]) -> "Polynomial":
        """Re-express over another symbol list containing every used symbol."""
        ambient = tuple(ambient)
        index = {s: i for i, s in enumerate(ambient)}
        out = {}
        for e, c in self._terms.items():
            ne = [0] * len(ambient)
            for s, k in zip(self.ambient, e):
                if k:
                    if s not in index:
                        raise AmbientMismatch(f"symbol {s!r} used but missing from {ambient}")
                    ne[index[s]] = k
            out[tuple(ne)] = c
        return Polynomial(ambient, out)

    def used_symbols(self) -> Tuple[str, ...]:
        return tuple(s for i, s in enumerate(self.ambient) if any(e[i] for e in self._terms))

    # -- text -------------------------------------------------------------
    def sorted_terms(self):
        """Terms in canonical order: total degree descending, then exponents descending."""
        return sorted(self._terms.items(), key=lambda t: (-sum(t[0]), tuple(-x for x in t[0])))

    def to_str(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = [s if k == 1 else f"{s}^{k}" for s, k in zip(self.ambient, e) if k]
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            parts.append(("-" if c < 0 else "+", body))
        sign, first = parts[0]
        text = ("-" + first) if sign == "-" else first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    __str__ = to_str

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r}, ambient={self.ambient!r})"


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    a._check(b)
    return a + b


def poly_sub(a: Polynomial, b: Polynomial) -> Polynomial:
    a._check(b)
    return a - b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    a._check(b)
    return a * b


def reduce_mod_p(f: Polynomial, p: int) -> Polynomial:
    """Reduce every coefficient into ``[0, p)``; vanishing terms are dropped."""
    if p < 2:
        raise ValueError(f"modulus must be >= 2, got {p}")
    return Polynomial(f.ambient, {e: c % p for e, c in f.items()})


class ParseError(ValueError):
    pass


def parse_polynomial(text: str, ambient: Sequence[str]) -> Polynomial:
    """Parse ``+ - * ^`` expressions with integer literals and parentheses.

    The expression is read with Python's own parser (``^`` is rewritten to
    ``**``) and only arithmetic nodes are accepted.
    """
    ambient = tuple(ambient)
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse polynomial {text!r}: {exc.msg}") from None
    return _from_ast(tree.body, ambient, text)


def _from_ast(node, ambient, text) -> Polynomial:
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return Polynomial.const(node.value, ambient)
    if isinstance(node, ast.Name):
        if node.id not in ambient:
            raise ParseError(f"unknown symbol {node.id!r} in {text!r}")
        return Polynomial.var(node.id, ambient)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _from_ast(node.operand, ambient, text)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            if not (isinstance(exp, ast.Constant) and type(exp.value) is int and exp.value >= 0):
                raise ParseError(f"exponents must be nonnegative integer literals in {text!r}")
            return _from_ast(node.left, ambient, text) ** exp.value
        left = _from_ast(node.left, ambient, text)
        right = _from_ast(node.right, ambient, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
    raise ParseError(f"unsupported syntax in {text!r}")


def total_degree(exps: Iterable[int]) -> int:
    return sum(exps)
