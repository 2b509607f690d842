"""Weighted pushdown automata and the grammar <-> automaton conversions.

Acceptance is by final location *and* empty stack, after the whole input
is read.  Every move pops exactly one symbol.  The number of accepting runs
(each run weighted by the product of its move weights) is the multiplicity
of a word.

Run counting relies on a pruning measure: ``units`` of a move is how much
input the move consumes in the units of the *underlying* word (1 for a
reading move by default), locations may hold ``credit`` (already buffered
input) and each input letter may be worth several units.  Since an
accepting run pops every stack symbol, a configuration whose stack needs
more units than the input can still supply is dead.  This is sound for the
automata built here; arbitrary automata with unbounded epsilon-behaviour are
not supported.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .grammar import Grammar, Rule, prune

Loc = Hashable
Sym = Hashable


@dataclass(frozen=True)
class Move:
    loc: Loc
    top: Sym
    read: Optional[str]          # None for an epsilon move
    target: Loc
    push: Tuple[Sym, ...]        # push[0] becomes the new top
    weight: int = 1
    units: Optional[int] = None  # defaults to 1 for reading moves, 0 otherwise

    @property
    def cost(self) -> int:
        if self.units is not None:
            return self.units
        return 0 if self.read is None else 1


class PDAError(ValueError):
    pass


class PDA:
    def __init__(self, alphabet: Sequence[str], stack_alphabet: Iterable[Sym], locations: Iterable[Loc],
                 initial: Loc, bottom: Sym, accepting: Iterable[Loc], moves: Iterable[Move],
                 credit: Optional[Mapping[Loc, int]] = None,
                 letter_units: Optional[Mapping[str, int]] = None):
        self.alphabet = tuple(alphabet)
        self.stack_alphabet = frozenset(stack_alphabet)
        self.locations = frozenset(locations)
        self.initial = initial
        self.bottom = bottom
        self.accepting = frozenset(accepting)
        self.moves = tuple(moves)
        self.credit = dict(credit or {})
        self.letter_units = dict(letter_units or {})
        self._check()
        self._index: Dict[Tuple[Loc, Sym], List[Move]] = {}
        for m in self.moves:
            self._index.setdefault((m.loc, m.top), []).append(m)
        self._mu = self._min_units()

    def _check(self) -> None:
        if self.initial not in self.locations or not self.accepting <= self.locations:
            raise PDAError("initial/accepting locations must be locations")
        if self.bottom not in self.stack_alphabet:
            raise PDAError("bottom symbol must be a stack symbol")
        for m in self.moves:
            if m.loc not in self.locations or m.target not in self.locations:
                raise PDAError(f"move {m} uses an unknown location")
            if m.top not in self.stack_alphabet or any(s not in self.stack_alphabet for s in m.push):
                raise PDAError(f"move {m} uses an unknown stack symbol")
            if m.read is not None and m.read not in self.alphabet:
                raise PDAError(f"move {m} reads a letter outside the alphabet")
            if m.weight < 1:
                raise PDAError(f"move {m} has a non-positive weight")

    def moves_from(self, loc: Loc, top: Sym) -> List[Move]:
        return self._index.get((loc, top), [])

    def _min_units(self) -> Dict[Sym, float]:
        """Least units consumed by any run popping a symbol (location-free bound)."""
        inf = float("inf")
        mu: Dict[Sym, float] = {s: inf for s in self.stack_alphabet}
        changed = True
        while changed:
            changed = False
            for m in self.moves:
                c = m.cost + sum(mu[s] for s in m.push)
                if c < mu[m.top]:
                    mu[m.top] = c
                    changed = True
        return mu

    def __repr__(self) -> str:
        return (f"PDA({len(self.locations)} locations, {len(self.stack_alphabet)} stack symbols, "
                f"{len(self.moves)} moves)")


class RunCountDiverges(RuntimeError):
    pass


def count_runs(p: PDA, w: Sequence[str]) -> int:
    """Weighted number of accepting runs on ``w``."""
    w = tuple(w)
    bad = [a for a in w if a not in p.alphabet]
    if bad:
        raise PDAError(f"letters {bad} are outside the input alphabet")
    suffix = [0] * (len(w) + 1)
    for i in range(len(w) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + p.letter_units.get(w[i], 1)
    mu = p._mu
    memo: Dict[Tuple, int] = {}
    on_path: Set[Tuple] = set()

    def go(loc, stack: Tuple, pos: int) -> int:
        key = (loc, stack, pos)
        if key in memo:
            return memo[key]
        if not stack:
            return 1 if loc in p.accepting and pos == len(w) else 0
        if sum(mu[s] for s in stack) > p.credit.get(loc, 0) + suffix[pos]:
            return 0
        if key in on_path:
            raise RunCountDiverges(f"configuration {key} repeats on an epsilon cycle")
        on_path.add(key)
        total = 0
        top, rest = stack[-1], stack[:-1]
        for m in p.moves_from(loc, top):
            if m.read is None:
                npos = pos
            elif pos < len(w) and w[pos] == m.read:
                npos = pos + 1
            else:
                continue
            total += m.weight * go(m.target, rest + tuple(reversed(m.push)), npos)
        on_path.discard(key)
        memo[key] = total
        return total

    return go(p.initial, (p.bottom,), 0)


def _fresh(base: str, taken: Set) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def cfg_to_pda(g: Grammar, N: Optional[str] = None) -> PDA:
    """Expand-and-match automaton with one accepting run per leftmost derivation.

    Locations ``q0 -> q -> f``; the first move pushes ``N`` over the bottom
    marker, expansions replace a nonterminal by a right-hand side (carrying
    the rule weight), terminals are matched by reading, and popping the
    bottom marker enters ``f``.
    """
    N = g.start if N is None else N
    if N not in g.nonterminals:
        raise PDAError(f"unknown nonterminal {N!r}")
    bottom = _fresh("#", set(g.terminals) | set(g.nonterminals))
    moves = [Move("q0", bottom, None, "q", (N, bottom))]
    for r in g.rules:
        moves.append(Move("q", r.lhs, None, "q", r.rhs, r.weight))
    for a in g.terminals:
        moves.append(Move("q", a, a, "q", ()))
    moves.append(Move("q", bottom, None, "f", ()))
    stack = set(g.terminals) | set(g.nonterminals) | {bottom}
    return PDA(g.terminals, stack, ["q0", "q", "f"], "q0", bottom, ["f"], moves)


@dataclass(frozen=True)
class Homomorphism:
    """Letter-to-word map ``a_i -> w_i`` with nonempty images."""

    images: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def __post_init__(self):
        for a, w in self.images:
            if not w:
                raise ValueError(f"image of {a!r} is empty")

    @classmethod
    def of(cls, mapping: Mapping[str, Sequence[str]]) -> "Homomorphism":
        return cls(tuple((a, tuple(w)) for a, w in mapping.items()))

    @property
    def source(self) -> Tuple[str, ...]:
        return tuple(a for a, _ in self.images)

    def image(self, a: str) -> Tuple[str, ...]:
        return dict(self.images)[a]

    def apply(self, w: Sequence[str]) -> Tuple[str, ...]:
        table = dict(self.images)
        out: Tuple[str, ...] = ()
        for a in w:
            out += table[a]
        return out


END = "<end>"


def pda_inverse_hom(p: PDA, h: Homomorphism) -> PDA:
    """Automaton ``B`` over the source alphabet of ``h`` with ``[[B]]_w = [[p]]_{h(w)}``.

    ``B`` simulates ``p`` on a buffer holding the unread part of ``h(a)``.
    To keep runs in bijection, a letter is loaded only when the buffer is
    empty and ``p`` moves only while the buffer is nonempty, except after
    the final ``end`` guess, where only epsilon moves of ``p`` remain.  A new
    bottom marker lets ``B`` pop ``p``'s empty stack configuration cleanly.
    """
    for a, w in h.images:
        bad = [c for c in w if c not in p.alphabet]
        if bad:
            raise PDAError(f"image of {a!r} uses letters {bad} outside the automaton alphabet")
    bottom = _fresh("#B", set(p.stack_alphabet))
    init, acc = ("<init>",), ("<accept>",)
    stack = set(p.stack_alphabet) | {bottom}
    suffixes: Set[Tuple[str, ...]] = {()}
    for _, w in h.images:
        for i in range(len(w)):
            suffixes.add(w[i:])
    moves = [Move(init, bottom, None, (p.initial, ()), (p.bottom, bottom), units=0)]
    locations = {init, acc}
    credit = {}
    for loc in p.locations:
        for buf in suffixes:
            locations.add((loc, buf))
            credit[(loc, buf)] = len(buf)
        locations.add((loc, END))
        for Z in stack:
            for a, w in h.images:
                moves.append(Move((loc, ()), Z, a, (loc, w), (Z,), units=0))
            moves.append(Move((loc, ()), Z, None, (loc, END), (Z,), units=0))
    for m in p.moves:
        for buf in suffixes:
            if not buf:
                continue
            if m.read is None:
                moves.append(Move((m.loc, buf), m.top, None, (m.target, buf), m.push, m.weight,
                                  units=m.cost))
            elif buf[0] == m.read:
                moves.append(Move((m.loc, buf), m.top, None, (m.target, buf[1:]), m.push,
                                  m.weight, units=m.cost))
        if m.read is None:
            moves.append(Move((m.loc, END), m.top, None, (m.target, END), m.push, m.weight,
                              units=m.cost))
    for f in p.accepting:
        moves.append(Move((f, END), bottom, None, acc, (), units=0))
    letter_units = {a: len(w) for a, w in h.images}
    return PDA(h.source, stack, locations, init, bottom, [acc], moves, credit, letter_units)


# ---------------------------------------------------------------------------
# automaton -> grammar
# ---------------------------------------------------------------------------

class InfiniteMultiplicity(ValueError):
    pass


def _normalize_pushes(p: PDA) -> Tuple[List[Move], Set[Loc]]:
    """Split pushes longer than two into chains through fresh locations.

    ``pop Z, push Y1..Ym`` becomes ``pop Z, push Y(m-1) Ym`` followed by
    ``pop Y(j), push Y(j-1) Y(j)`` steps; each fresh location has exactly
    one continuation, so run counts are unchanged.
    """
    out: List[Move] = []
    extra: Set[Loc] = set()
    for idx, m in enumerate(p.moves):
        k = len(m.push)
        if k <= 2:
            out.append(m)
            continue
        ys = m.push
        chain = [("<push>", idx, j) for j in range(k - 2)]
        extra.update(chain)
        out.append(Move(m.loc, m.top, m.read, chain[0], ys[k - 2:], m.weight))
        for j in range(k - 2):
            nxt = chain[j + 1] if j + 1 < k - 2 else m.target
            top = ys[k - 2 - j]
            out.append(Move(chain[j], top, None, nxt, (ys[k - 3 - j], top)))
    return out, extra


def pda_to_cfg(p: PDA) -> Tuple[Grammar, str]:
    """Proper grammar whose start symbol has the automaton's multiplicities.

    Triple construction ``[p Z q]`` (pop ``Z`` going from ``p`` to ``q``)
    restricted to triples that can actually pop, followed by weighted
    removal of epsilon rules and unit rules.  Nonterminals are renamed
    ``S, T1, T2, ...``.
    """
    moves, extra = _normalize_pushes(p)
    locs = set(p.locations) | extra
    by_loc: Dict[Tuple, List[Move]] = {}
    for m in moves:
        by_loc.setdefault((m.loc, m.top), []).append(m)

    # poppable triples: least fixpoint
    pop: Dict[Tuple[Loc, Sym], Set[Loc]] = {}

    def ends(l, Z) -> Set[Loc]:
        return pop.get((l, Z), set())

    changed = True
    while changed:
        changed = False
        for m in moves:
            if not m.push:
                targets = {m.target}
            elif len(m.push) == 1:
                targets = set(ends(m.target, m.push[0]))
            else:
                targets = set()
                for r in ends(m.target, m.push[0]):
                    targets |= ends(r, m.push[1])
            cur = pop.setdefault((m.loc, m.top), set())
            if not targets <= cur:
                cur |= targets
                changed = True

    # rules over triples reachable from the initial triple(s)
    rules: Dict[Tuple, int] = {}
    start = ("<S>",)
    todo = []
    seen = set()

    def want(t):
        if t not in seen:
            seen.add(t)
            todo.append(t)

    for f in p.accepting:
        if f in ends(p.initial, p.bottom):
            t = (p.initial, p.bottom, f)
            want(t)
            rules[(start, (t,))] = rules.get((start, (t,)), 0) + 1
    while todo:
        l, Z, q = todo.pop()
        for m in by_loc.get((l, Z), ()):
            head = (m.read,) if m.read is not None else ()
            if not m.push:
                if m.target == q:
                    key = ((l, Z, q), head)
                    rules[key] = rules.get(key, 0) + m.weight
            elif len(m.push) == 1:
                if q in ends(m.target, m.push[0]):
                    t = (m.target, m.push[0], q)
                    want(t)
                    key = ((l, Z, q), head + (t,))
                    rules[key] = rules.get(key, 0) + m.weight
            else:
                for r in ends(m.target, m.push[0]):
                    if q in ends(r, m.push[1]):
                        t1, t2 = (m.target, m.push[0], r), (r, m.push[1], q)
                        want(t1)
                        want(t2)
                        key = ((l, Z, q), head + (t1, t2))
                        rules[key] = rules.get(key, 0) + m.weight
    nts = [start] + sorted(seen, key=repr)
    rules = _eliminate_epsilon(nts, rules)
    rules = _eliminate_units(nts, rules, set(p.alphabet))
    names = {start: "S"}
    for i, n in enumerate(nts[1:], 1):
        names[n] = f"T{i}"
    terms = set(p.alphabet)
    for n in list(names):
        while names[n] in terms:
            names[n] = "_" + names[n]
    out = [Rule(names[l], tuple(names.get(s, s) if not isinstance(s, str) else s for s in rhs), w)
           for (l, rhs), w in rules.items() if w]
    g = Grammar(p.alphabet, [names[n] for n in nts], "S", out)
    return prune(g), "S"


def _topo(nodes: Iterable, edges: Mapping, what: str) -> List:
    """Topological order (dependencies first); raises on a cycle."""
    order, state = [], {}

    def visit(n):
        st = state.get(n)
        if st == 1:
            raise InfiniteMultiplicity(f"cyclic {what} through {n!r}")
        if st == 2:
            return
        state[n] = 1
        for m in edges.get(n, ()):
            visit(m)
        state[n] = 2
        order.append(n)

    for n in nodes:
        visit(n)
    return order


def _eliminate_epsilon(nts: List, rules: Dict[Tuple, int]) -> Dict[Tuple, int]:
    nt = set(nts)
    nullable: Set = set()
    changed = True
    while changed:
        changed = False
        for (l, rhs), w in rules.items():
            if l not in nullable and all(s in nullable for s in rhs):
                nullable.add(l)
                changed = True
    deps: Dict = {}
    for (l, rhs), w in rules.items():
        if l in nullable and all(s in nullable for s in rhs):
            deps.setdefault(l, set()).update(rhs)
    eps: Dict = {}
    for n in _topo(sorted(nullable, key=repr), deps, "epsilon derivations"):
        total = 0
        for (l, rhs), w in rules.items():
            if l == n and all(s in nullable for s in rhs):
                prod = w
                for s in rhs:
                    prod *= eps[s]
                total += prod
        eps[n] = total
    out: Dict[Tuple, int] = {}
    for (l, rhs), w in rules.items():
        options = [[(s, 1)] + ([(None, eps[s])] if s in nullable else []) for s in rhs]
        for choice in _product(options):
            kept = tuple(s for s, _ in choice if s is not None)
            if not kept:
                continue
            mult = w
            for _, f in choice:
                mult *= f
            if mult:
                out[(l, kept)] = out.get((l, kept), 0) + mult
    return out


def _product(options):
    if not options:
        yield ()
        return
    for first in options[0]:
        for rest in _product(options[1:]):
            yield (first,) + rest


def _eliminate_units(nts: List, rules: Dict[Tuple, int], terminals: Set[str]) -> Dict[Tuple, int]:
    def is_unit(rhs):
        return len(rhs) == 1 and rhs[0] not in terminals

    unit_edges: Dict = {}
    for (l, rhs), w in rules.items():
        if is_unit(rhs):
            unit_edges.setdefault(l, set()).add(rhs[0])
    order = _topo(nts, unit_edges, "unit rules")
    # closure[N][M] = weighted number of unit chains N =>* M
    closure: Dict = {}
    for n in order:
        c = {n: 1}
        for (l, rhs), w in rules.items():
            if l == n and is_unit(rhs):
                for m, k in closure[rhs[0]].items():
                    c[m] = c.get(m, 0) + w * k
        closure[n] = c
    by_lhs: Dict = {}
    for (l, rhs), w in rules.items():
        if not is_unit(rhs):
            by_lhs.setdefault(l, []).append((rhs, w))
    out: Dict[Tuple, int] = {}
    for n in nts:
        for m, k in closure[n].items():
            for rhs, w in by_lhs.get(m, ()):
                out[(n, rhs)] = out.get((n, rhs), 0) + k * w
    return out
