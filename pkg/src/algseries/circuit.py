"""Arithmetic circuits (straight-line programs) and circuit gadgets.

A :class:`Circuit` is an append-only tuple of gates in topological order.
Gates are plain tuples::

    ("input", name) | ("const", c) | ("add", i, j) | ("sub", i, j) | ("mul", i, j)

with ``i, j`` indices of earlier gates.  Circuits never change after
construction; new circuits are grown with a :class:`CircuitBuilder`, which
can start from an existing gate list so that stages of an iteration share
all of their earlier gates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .poly import Polynomial
from .series import Graded, PrecisionError, SeriesRing, TruncatedSeries

Gate = Tuple
OPS = ("add", "sub", "mul")


class CircuitError(ValueError):
    pass


class Circuit:
    """Immutable DAG of ``+ - *`` gates over integer constants and inputs."""

    __slots__ = ("vars", "gates", "output")

    def __init__(self, vars: Sequence[str], gates: Sequence[Gate], output: int):
        self.vars: Tuple[str, ...] = tuple(vars)
        self.gates: Tuple[Gate, ...] = tuple(gates)
        self.output = output
        self._validate()

    def _validate(self) -> None:
        known = set(self.vars)
        for idx, g in enumerate(self.gates):
            kind = g[0]
            if kind == "input":
                if g[1] not in known:
                    raise CircuitError(f"gate {idx}: input {g[1]!r} not among vars {self.vars}")
            elif kind == "const":
                if not isinstance(g[1], int):
                    raise CircuitError(f"gate {idx}: non-integer constant {g[1]!r}")
            elif kind in OPS:
                if not (0 <= g[1] < idx and 0 <= g[2] < idx):
                    raise CircuitError(f"gate {idx}: operands {g[1:]} not earlier gates")
            else:
                raise CircuitError(f"gate {idx}: unknown kind {kind!r}")
        if not 0 <= self.output < len(self.gates):
            raise CircuitError(f"output index {self.output} out of range")

    @property
    def size(self) -> int:
        return len(self.gates)

    def with_output(self, output: int) -> "Circuit":
        return Circuit(self.vars, self.gates, output)

    def live_gates(self, outputs: Optional[Iterable[int]] = None) -> List[int]:
        """Indices of gates reachable from the outputs, in topological order."""
        live = [False] * len(self.gates)
        for o in (outputs if outputs is not None else [self.output]):
            live[o] = True
        for idx in range(len(self.gates) - 1, -1, -1):
            if live[idx]:
                g = self.gates[idx]
                if g[0] in OPS:
                    live[g[1]] = live[g[2]] = True
        return [i for i, v in enumerate(live) if v]

    def compact(self) -> "Circuit":
        """Drop dead gates and renumber the rest."""
        live = self.live_gates()
        remap = {old: new for new, old in enumerate(live)}
        gates = []
        for old in live:
            g = self.gates[old]
            gates.append((g[0], remap[g[1]], remap[g[2]]) if g[0] in OPS else g)
        return Circuit(self.vars, gates, remap[self.output])

    def live_size(self) -> int:
        return len(self.live_gates())

    def depth(self) -> int:
        d: Dict[int, int] = {}
        for idx in self.live_gates():
            g = self.gates[idx]
            d[idx] = 1 + max(d[g[1]], d[g[2]]) if g[0] in OPS else 0
        return d[self.output]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.vars, self.gates, self.output) == (other.vars, other.gates, other.output)

    def __hash__(self) -> int:
        return hash((self.vars, self.gates, self.output))

    def __repr__(self) -> str:
        return f"Circuit(vars={self.vars}, size={self.size}, output={self.output})"

    # -- text format -------------------------------------------------------
    def to_text(self) -> str:
        lines = ["vars: " + " ".join(self.vars)]
        for i, g in enumerate(self.gates):
            if g[0] == "input":
                lines.append(f"g{i} = input {g[1]}")
            elif g[0] == "const":
                lines.append(f"g{i} = const {g[1]}")
            else:
                lines.append(f"g{i} = {g[0]} g{g[1]} g{g[2]}")
        lines.append(f"output g{self.output}")
        return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Inverse of :meth:`Circuit.to_text`.

    The ``vars:`` header is optional; without it the variables are the
    input names in order of first appearance.
    """
    vars_: Optional[List[str]] = None
    gates: List[Gate] = []
    output = None
    seen_inputs: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            vars_ = line[len("vars:"):].split()
            continue
        toks = line.split()
        if toks[0] == "output":
            if len(toks) != 2:
                raise CircuitError(f"line {lineno}: malformed output line")
            output = _gate_ref(toks[1], lineno)
            continue
        if len(toks) < 4 or toks[1] != "=":
            raise CircuitError(f"line {lineno}: expected 'g<i> = ...', got {raw!r}")
        if _gate_ref(toks[0], lineno) != len(gates):
            raise CircuitError(f"line {lineno}: gates must be numbered consecutively from g0")
        kind = toks[2]
        if kind == "input" and len(toks) == 4:
            gates.append(("input", toks[3]))
            if toks[3] not in seen_inputs:
                seen_inputs.append(toks[3])
        elif kind == "const" and len(toks) == 4:
            try:
                gates.append(("const", int(toks[3])))
            except ValueError:
                raise CircuitError(f"line {lineno}: bad constant {toks[3]!r}") from None
        elif kind in OPS and len(toks) == 5:
            gates.append((kind, _gate_ref(toks[3], lineno), _gate_ref(toks[4], lineno)))
        else:
            raise CircuitError(f"line {lineno}: cannot parse {raw!r}")
    if output is None:
        raise CircuitError("missing 'output' line")
    return Circuit(vars_ if vars_ is not None else seen_inputs, gates, output)


def _gate_ref(tok: str, lineno: int) -> int:
    if not (tok.startswith("g") and tok[1:].isdigit()):
        raise CircuitError(f"line {lineno}: bad gate reference {tok!r}")
    return int(tok[1:])


class CircuitBuilder:
    """Append-only gate list with convenience constructors.

    With ``fold=True`` the trivial identities ``x*0``, ``x*1``, ``x+0``,
    ``x-0`` and constant-constant operations are folded on the fly; this is
    peephole simplification, not structural hashing.
    """

    def __init__(self, vars: Sequence[str], base: Optional[Circuit] = None, fold: bool = True):
        self.vars = tuple(vars)
        self.fold = fold
        self.gates: List[Gate] = []
        self._inputs: Dict[str, int] = {}
        self._consts: Dict[int, int] = {}
        if base is not None:
            if tuple(base.vars) != self.vars:
                raise CircuitError("base circuit has different vars")
            for g in base.gates:
                self._push(g)

    def _push(self, g: Gate) -> int:
        idx = len(self.gates)
        self.gates.append(g)
        if g[0] == "input":
            self._inputs.setdefault(g[1], idx)
        elif g[0] == "const":
            self._consts.setdefault(g[1], idx)
        return idx

    def input(self, name: str) -> int:
        if name not in self.vars:
            raise CircuitError(f"unknown input {name!r}")
        if name in self._inputs:
            return self._inputs[name]
        return self._push(("input", name))

    def const(self, c: int) -> int:
        c = int(c)
        if c in self._consts:
            return self._consts[c]
        return self._push(("const", c))

    def _cval(self, i: int) -> Optional[int]:
        g = self.gates[i]
        return g[1] if g[0] == "const" else None

    def add(self, i: int, j: int) -> int:
        if self.fold:
            a, b = self._cval(i), self._cval(j)
            if a is not None and b is not None:
                return self.const(a + b)
            if a == 0:
                return j
            if b == 0:
                return i
        return self._push(("add", i, j))

    def sub(self, i: int, j: int) -> int:
        if self.fold:
            a, b = self._cval(i), self._cval(j)
            if a is not None and b is not None:
                return self.const(a - b)
            if b == 0:
                return i
        return self._push(("sub", i, j))

    def mul(self, i: int, j: int) -> int:
        if self.fold:
            a, b = self._cval(i), self._cval(j)
            if a is not None and b is not None:
                return self.const(a * b)
            if a == 0 or b == 0:
                return self.const(0)
            if a == 1:
                return j
            if b == 1:
                return i
        return self._push(("mul", i, j))

    def neg(self, i: int) -> int:
        return self.sub(self.const(0), i)

    def sum(self, items: Sequence[int]) -> int:
        if not items:
            return self.const(0)
        acc = items[0]
        for it in items[1:]:
            acc = self.add(acc, it)
        return acc

    def product(self, items: Sequence[int]) -> int:
        if not items:
            return self.const(1)
        acc = items[0]
        for it in items[1:]:
            acc = self.mul(acc, it)
        return acc

    def power(self, i: int, e: int, cache: Optional[Dict[int, int]] = None) -> int:
        """``gate_i ** e`` by repeated squaring; ``cache`` maps exponents to gates."""
        if cache is None:
            cache = {}
        cache.setdefault(1, i)
        if e in cache:
            return cache[e]
        if e == 0:
            return self.const(1)
        half = self.power(i, e // 2, cache)
        sq = self.mul(half, half)
        out = self.mul(sq, i) if e % 2 else sq
        cache[e] = out
        return out

    def embed(self, c: Circuit, inputs: Optional[Mapping[str, int]] = None) -> int:
        """Copy the live gates of ``c``, wiring its inputs to given gates."""
        remap: Dict[int, int] = {}
        for idx in c.live_gates():
            g = c.gates[idx]
            if g[0] == "input":
                remap[idx] = inputs[g[1]] if inputs and g[1] in inputs else self.input(g[1])
            elif g[0] == "const":
                remap[idx] = self.const(g[1])
            else:
                remap[idx] = getattr(self, g[0])(remap[g[1]], remap[g[2]])
        return remap[c.output]

    def polynomial(self, f: Polynomial, values: Mapping[str, int]) -> int:
        """Gates computing ``f`` with each ambient symbol wired to ``values``."""
        caches = {s: {} for s in f.ambient}
        terms = []
        for exps, c in f.sorted_terms():
            factors = [self.power(values[s], e, caches[s]) for s, e in zip(f.ambient, exps) if e]
            terms.append(self.mul(self.const(c), self.product(factors)))
        return self.sum(terms)

    def build(self, output: int) -> Circuit:
        return Circuit(self.vars, self.gates, output)


def const_circuit(c: int, vars: Sequence[str] = ()) -> Circuit:
    return Circuit(vars, [("const", c)], 0)


def input_circuit(name: str, vars: Optional[Sequence[str]] = None) -> Circuit:
    return Circuit(vars if vars is not None else (name,), [("input", name)], 0)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _run(c: Circuit, outputs: Sequence[int], leaf: Callable, const: Callable,
         add: Callable, sub: Callable, mul: Callable) -> List:
    vals: Dict[int, object] = {}
    for idx in c.live_gates(outputs):
        g = c.gates[idx]
        kind = g[0]
        if kind == "input":
            vals[idx] = leaf(g[1])
        elif kind == "const":
            vals[idx] = const(g[1])
        elif kind == "add":
            vals[idx] = add(vals[g[1]], vals[g[2]])
        elif kind == "sub":
            vals[idx] = sub(vals[g[1]], vals[g[2]])
        else:
            vals[idx] = mul(vals[g[1]], vals[g[2]])
    return [vals[o] for o in outputs]


def eval_mod_p(c: Circuit, assignment: Mapping[str, int], p: int) -> int:
    """Value of the circuit at an integer point, modulo ``p``."""
    if p < 2:
        raise ValueError(f"modulus must be >= 2, got {p}")
    missing = [v for v in c.vars if v not in assignment and _uses(c, v)]
    if missing:
        raise KeyError(f"assignment missing variables {missing}")
    return _run(c, [c.output],
                leaf=lambda v: assignment[v] % p,
                const=lambda k: k % p,
                add=lambda a, b: (a + b) % p,
                sub=lambda a, b: (a - b) % p,
                mul=lambda a, b: (a * b) % p)[0]


def eval_exact(c: Circuit, assignment: Mapping[str, int], outputs: Optional[Sequence[int]] = None):
    """Exact integer evaluation (beware: values can grow doubly exponentially)."""
    outs = list(outputs) if outputs is not None else [c.output]
    res = _run(c, outs, leaf=lambda v: assignment[v], const=lambda k: k,
               add=lambda a, b: a + b, sub=lambda a, b: a - b, mul=lambda a, b: a * b)
    return res if outputs is not None else res[0]


def eval_poly(c: Circuit) -> Polynomial:
    """Expand the represented polynomial exactly (small circuits only)."""
    amb = c.vars
    return _run(c, [c.output], leaf=lambda v: Polynomial.var(v, amb),
                const=lambda k: Polynomial.const(k, amb),
                add=lambda a, b: a + b, sub=lambda a, b: a - b, mul=lambda a, b: a * b)[0]


def _uses(c: Circuit, v: str) -> bool:
    return any(c.gates[i] == ("input", v) for i in c.live_gates())


def eval_graded(c: Circuit, ring: SeriesRing, leaves: Mapping[str, Graded],
                outputs: Optional[Sequence[int]] = None) -> List[Graded]:
    """Kernel-level series evaluation of several outputs sharing one pass."""
    outs = list(outputs) if outputs is not None else [c.output]
    return _run(c, outs, leaf=lambda v: leaves[v], const=ring.const,
                add=ring.add, sub=ring.sub, mul=ring.mul)


def eval_series(c: Circuit, assignment: Optional[Mapping[str, TruncatedSeries]] = None,
                n: int = 0, p: Optional[int] = None,
                indets: Optional[Sequence[str]] = None) -> TruncatedSeries:
    """Truncated series of the represented polynomial after substitution.

    With ``assignment=None`` every circuit variable is mapped to the
    indeterminate of the same name, so the result is simply the polynomial
    truncated at total degree ``n`` (coefficients mod ``p`` if given).
    """
    if assignment is None:
        indets = tuple(indets) if indets is not None else c.vars
        ring = SeriesRing(len(indets), n, p)
        pos = {s: i for i, s in enumerate(indets)}
        leaves = {v: ring.var(pos[v]) for v in c.vars if v in pos}
    else:
        series = list(assignment.values())
        indets = series[0].indets if series else tuple(indets or ())
        for s in series:
            if s.indets != indets:
                raise ValueError("assigned series use different indeterminates")
            if s.order_bound < n:
                raise PrecisionError(f"operand precision {s.order_bound} below requested {n}")
        ring = SeriesRing(len(indets), n, p)
        leaves = {v: s.graded(ring) for v, s in assignment.items()}
    for v in c.vars:
        if v not in leaves and _uses(c, v):
            raise KeyError(f"no value for variable {v!r}")
    g = eval_graded(c, ring, leaves)[0]
    return TruncatedSeries.from_graded(ring, g, indets)


# ---------------------------------------------------------------------------
# gadgets
# ---------------------------------------------------------------------------

def geometric_sum_gates(b: CircuitBuilder, x: int, m: int) -> int:
    """Gates for ``sum_{i=0}^{m} x^i`` using O(log m) gates.

    Raises ``[[x, 1], [0, 1]]`` to the m-th power by square-and-multiply,
    tracking only the top row ``(x^j, sum_{i<j} x^i)``; the answer is
    ``x^m + sum_{i<m} x^i``.  Each bit of ``m`` costs at most 5 gates.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return b.const(1)
    one = b.const(1)
    a, s = x, one
    for bit in bin(m)[3:]:
        s = b.add(b.mul(a, s), s)
        a = b.mul(a, a)
        if bit == "1":
            s = b.add(a, s)
            a = b.mul(a, x)
    return b.add(a, s)


def geometric_sum_circuit(base: Circuit, m: int) -> Circuit:
    b = CircuitBuilder(base.vars, fold=False)
    x = b.embed(base)
    return b.build(geometric_sum_gates(b, x, m))


def _matrix_check(entries) -> int:
    l = len(entries)
    if any(len(row) != l for row in entries):
        raise CircuitError("matrix must be square")
    return l


def charpoly_gates(b: CircuitBuilder, M: Sequence[Sequence[int]]) -> List[int]:
    """Berkowitz: gates for the coefficients ``[1, c1, ..., cl]`` of det(tI - M).

    Division free; the vector for ``M`` is a lower-triangular Toeplitz
    matrix (built from ``M[0][0]`` and the products ``R A^j C``) applied to
    the vector of the trailing principal submatrix ``A``.
    """
    l = len(M)
    one = b.const(1)
    vec = [one]
    for r in range(l - 1, -1, -1):
        # M restricted to rows/cols r..l-1: a = M[r][r], R row, C column, A block
        a = M[r][r]
        R = [M[r][j] for j in range(r + 1, l)]
        C = [M[i][r] for i in range(r + 1, l)]
        size = l - r
        col = [one, b.neg(a)]
        cur = C
        for _ in range(size - 1):
            col.append(b.neg(b.sum([b.mul(x, y) for x, y in zip(R, cur)])))
            cur = [b.sum([b.mul(M[i][j], cur[j - r - 1]) for j in range(r + 1, l)])
                   for i in range(r + 1, l)]
        # (size+1) x size Toeplitz times vec (length size)
        new = []
        for i in range(size + 1):
            new.append(b.sum([b.mul(col[i - j], vec[j]) for j in range(size) if 0 <= i - j <= size]))
        vec = new
    return vec


def determinant_gates(b: CircuitBuilder, M: Sequence[Sequence[int]]) -> int:
    l = len(M)
    if l == 0:
        return b.const(1)
    if l == 1:
        return M[0][0]
    cp = charpoly_gates(b, M)
    return cp[l] if l % 2 == 0 else b.neg(cp[l])


def det_and_adjugate_gates(b: CircuitBuilder, M: Sequence[Sequence[int]]):
    """Determinant and adjugate via Cayley-Hamilton.

    With ``det(tI - M) = t^l + c1 t^(l-1) + ... + cl`` one has
    ``adj(M) = (-1)^(l+1) (M^(l-1) + c1 M^(l-2) + ... + c_(l-1) I)``,
    evaluated Horner-style with l-2 matrix products.
    """
    l = len(M)
    if l == 1:
        return M[0][0], [[b.const(1)]]
    cp = charpoly_gates(b, M)
    det = cp[l] if l % 2 == 0 else b.neg(cp[l])
    one, zero = b.const(1), b.const(0)
    B = [[one if i == j else zero for j in range(l)] for i in range(l)]
    for k in range(1, l):
        prod = [[b.sum([b.mul(M[i][t], B[t][j]) for t in range(l)]) for j in range(l)]
                for i in range(l)]
        B = [[b.add(prod[i][j], cp[k]) if i == j else prod[i][j] for j in range(l)]
             for i in range(l)]
    if l % 2 == 0:
        B = [[b.neg(x) for x in row] for row in B]
    return det, B


def _unified_vars(entries) -> Tuple[str, ...]:
    out: List[str] = []
    for row in entries:
        for c in row:
            for v in c.vars:
                if v not in out:
                    out.append(v)
    return tuple(out)


def determinant_circuit(entries: Sequence[Sequence[Circuit]]) -> Circuit:
    _matrix_check(entries)
    b = CircuitBuilder(_unified_vars(entries), fold=False)
    M = [[b.embed(c) for c in row] for row in entries]
    return b.build(determinant_gates(b, M))


def adjugate_circuits(entries: Sequence[Sequence[Circuit]]) -> List[List[Circuit]]:
    """Circuits for the adjugate; all share one gate list."""
    _matrix_check(entries)
    b = CircuitBuilder(_unified_vars(entries), fold=False)
    M = [[b.embed(c) for c in row] for row in entries]
    _, adj = det_and_adjugate_gates(b, M)
    gates = list(b.gates)
    return [[Circuit(b.vars, gates, g) for g in row] for row in adj]


def balance_alternate(c: Circuit) -> Circuit:
    """Equivalent circuit whose every leaf-to-output path has the same length.

    Levels alternate: level 0 holds inputs and constants, odd levels hold
    add/sub gates and even levels (>= 2) hold mul gates; the output sits on
    an even level.  Operands are lifted level by level with ``+ 0`` and
    ``* 1`` gates, where the padding constants are themselves lifted chains
    so that they too start at level 0.
    """
    b = CircuitBuilder(c.vars, fold=False)
    ones = [b.const(1)]
    zeros = [b.const(0)]

    def pad(level: int) -> None:
        while len(ones) <= level:
            l = len(ones)
            if l % 2:
                ones.append(b.add(ones[l - 1], zeros[l - 1]))
                zeros.append(b.add(zeros[l - 1], zeros[l - 1]))
            else:
                ones.append(b.mul(ones[l - 1], ones[l - 1]))
                zeros.append(b.mul(zeros[l - 1], ones[l - 1]))

    level: Dict[int, int] = {}
    lifted: Dict[Tuple[int, int], int] = {}
    node: Dict[int, int] = {}

    def lift(idx: int, target: int) -> int:
        key = (idx, target)
        if key in lifted:
            return lifted[key]
        if target == level[idx]:
            out = node[idx]
        else:
            below = lift(idx, target - 1)
            pad(target - 1)
            if target % 2:
                out = b.add(below, zeros[target - 1])
            else:
                out = b.mul(below, ones[target - 1])
        lifted[key] = out
        return out

    for idx in c.live_gates():
        g = c.gates[idx]
        if g[0] == "input":
            level[idx], node[idx] = 0, b.input(g[1])
        elif g[0] == "const":
            level[idx], node[idx] = 0, b._push(("const", g[1]))
        else:
            top = max(level[g[1]], level[g[2]])
            want_odd = g[0] != "mul"
            lv = top + 1
            if (lv % 2 == 1) != want_odd:
                lv += 1
            pad(lv - 1)
            level[idx] = lv
            node[idx] = b._push((g[0], lift(g[1], lv - 1), lift(g[2], lv - 1)))
    out_level = level[c.output]
    target = max(2, out_level + (out_level % 2))
    return b.build(lift(c.output, target))


def path_lengths(c: Circuit) -> set:
    """Set of distinct leaf-to-output path lengths (for balance checks)."""
    lengths: Dict[int, set] = {}
    for idx in c.live_gates():
        g = c.gates[idx]
        if g[0] in OPS:
            lengths[idx] = {l + 1 for l in lengths[g[1]] | lengths[g[2]]}
        else:
            lengths[idx] = {0}
    return lengths[c.output]


def level_kinds(c: Circuit) -> Dict[int, set]:
    """Map depth-from-leaves -> set of gate kinds found at that depth."""
    depth: Dict[int, int] = {}
    kinds: Dict[int, set] = {}
    for idx in c.live_gates():
        g = c.gates[idx]
        depth[idx] = 1 + max(depth[g[1]], depth[g[2]]) if g[0] in OPS else 0
        kinds.setdefault(depth[idx], set()).add("leaf" if g[0] not in OPS else
                                                 ("mul" if g[0] == "mul" else "add"))
    return kinds


def syntactic_degree(c: Circuit, per_variable: bool = False):
    """Upper bound on the total degree (or on every per-variable degree)."""
    deg: Dict[int, int] = {}
    for idx in c.live_gates():
        g = c.gates[idx]
        if g[0] == "input":
            deg[idx] = 1
        elif g[0] == "const":
            deg[idx] = 0
        elif g[0] == "mul":
            deg[idx] = deg[g[1]] + deg[g[2]]
        else:
            deg[idx] = max(deg[g[1]], deg[g[2]])
    return deg[c.output]


def degree_reversal_circuit(c: Circuit, Dprime: Optional[int] = None) -> Circuit:
    """Division-free circuit for ``(x1...xk)^D' * c(1/x1, ..., 1/xk)``.

    Every gate ``g`` is rewritten into a pair ``(N_g, e_g)`` with
    ``g(1/x) = N_g(x) / (x1...xk)^e_g``; sums bring both operands to the
    larger exponent and the output is multiplied by ``(x1...xk)^(D' - e)``.
    ``e_g`` is the syntactic degree, a per-variable degree certificate, so
    ``D'`` defaults to it; a smaller ``D'`` is rejected.
    """
    vars_ = c.vars
    b = CircuitBuilder(vars_, fold=True)
    xs = [b.input(v) for v in vars_]
    P = b.product(xs)
    pcache: Dict[int, int] = {}

    def ppow(e: int) -> int:
        return b.power(P, e, pcache) if e else b.const(1)

    pair: Dict[int, Tuple[int, int]] = {}
    for idx in c.live_gates():
        g = c.gates[idx]
        if g[0] == "input":
            i = vars_.index(g[1])
            pair[idx] = (b.product([x for j, x in enumerate(xs) if j != i]), 1)
        elif g[0] == "const":
            pair[idx] = (b.const(g[1]), 0)
        elif g[0] == "mul":
            (na, ea), (nb, eb) = pair[g[1]], pair[g[2]]
            pair[idx] = (b.mul(na, nb), ea + eb)
        else:
            (na, ea), (nb, eb) = pair[g[1]], pair[g[2]]
            e = max(ea, eb)
            left = b.mul(na, ppow(e - ea))
            right = b.mul(nb, ppow(e - eb))
            pair[idx] = (b.add(left, right) if g[0] == "add" else b.sub(left, right), e)
    n_out, e_out = pair[c.output]
    if Dprime is None:
        Dprime = e_out
    if Dprime < e_out:
        raise ValueError(f"D'={Dprime} is below the degree certificate {e_out}")
    return b.build(b.mul(n_out, ppow(Dprime - e_out)))


# ---------------------------------------------------------------------------
# univariate mod-p evaluation (Monte-Carlo degree probe)
# ---------------------------------------------------------------------------

def _kron_mul(a: List[int], b: List[int], n: int, p: int) -> List[int]:
    """Product of coefficient lists mod p, truncated to degree n.

    Long operands are packed into Python integers (Kronecker substitution)
    so the work happens in the interpreter's big-integer multiply.
    """
    if not a or not b:
        return []
    la, lb = min(len(a), n + 1), min(len(b), n + 1)
    if la * lb <= 4096:
        out = [0] * min(la + lb - 1, n + 1)
        for i in range(la):
            ai = a[i]
            if ai:
                for j in range(min(lb, n + 1 - i)):
                    out[i + j] += ai * b[j]
        return [v % p for v in out]
    bits = 2 * p.bit_length() + max(la, lb).bit_length() + 1
    nbytes = (bits + 7) // 8
    A = int.from_bytes(b"".join(v.to_bytes(nbytes, "little") for v in a[:la]), "little")
    B = int.from_bytes(b"".join(v.to_bytes(nbytes, "little") for v in b[:lb]), "little")
    m = min(la + lb - 1, n + 1)
    raw = (A * B).to_bytes(nbytes * (la + lb), "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % p for i in range(m)]


def eval_univariate_mod_p(c: Circuit, values: Mapping[str, List[int]], n: int, p: int) -> List[int]:
    """Evaluate with each variable replaced by a univariate polynomial mod p."""
    def add(a, b):
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] = (out[i] + v) % p
        return out

    def sub(a, b):
        return add(a, [(-v) % p for v in b])

    return _run(c, [c.output], leaf=lambda v: values[v], const=lambda k: [k % p],
                add=add, sub=sub, mul=lambda a, b: _kron_mul(a, b, n, p))[0]


DEFAULT_PROBE_PRIME = (1 << 61) - 1


@dataclass(frozen=True)
class DegreeProbe:
    """Outcome of a Monte-Carlo degree check.

    ``degree`` is the degree of ``c(r1 t, ..., rk t)`` for random ``r``; it
    never exceeds the true total degree and equals it unless the random
    point is a root of the top homogeneous component, which happens with
    probability at most ``degree / prime``.
    """

    degree: int
    threshold: int
    at_most_threshold: bool
    prime: int
    failure_bound: float
    probabilistic: bool = True


def degree_probe(c: Circuit, threshold: int, p: int = DEFAULT_PROBE_PRIME,
                 seed: Optional[int] = 0, max_degree: int = 200_000) -> DegreeProbe:
    """Monte-Carlo test of ``deg(c) <= threshold`` by random line restriction."""
    rng = random.Random(seed)
    U = syntactic_degree(c)
    if U > max_degree:
        raise ValueError(f"syntactic degree bound {U} exceeds probe limit {max_degree}")
    values = {v: [0, rng.randrange(1, p)] for v in c.vars}
    coeffs = eval_univariate_mod_p(c, values, U, p)
    deg = max((i for i, v in enumerate(coeffs) if v), default=-1)
    return DegreeProbe(deg, threshold, deg <= threshold, p, max(deg, 0) / p)
