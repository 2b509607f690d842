"""Proper weighted context-free grammars with derivation-count semantics.

A rule ``N -> X1 ... Xm [weight=w]`` stands for ``w`` parallel copies of an
unweighted rule; ``[[N]]_w`` counts leftmost derivations of ``w`` from ``N``
weighted this way.  Properness (nonempty right-hand sides, no rule whose
right-hand side is a single nonterminal) makes every count finite.

Words are tuples of terminal symbols; a plain string is accepted as a word
when every terminal is a single character.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .poly import Polynomial
from .polysys import PolySystem

Word = Tuple[str, ...]


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: Tuple[str, ...]
    weight: int = 1


class Grammar:
    """Immutable grammar; rules are kept grouped by left-hand side."""

    __slots__ = ("terminals", "nonterminals", "start", "rules", "_by_lhs", "_hash")

    def __init__(self, terminals: Sequence[str], nonterminals: Sequence[str], start: str,
                 rules: Iterable[Rule], check: bool = True):
        self.terminals = tuple(terminals)
        self.nonterminals = tuple(nonterminals)
        self.start = start
        order = {n: i for i, n in enumerate(self.nonterminals)}
        rules = list(rules)
        if check:
            _validate(self.terminals, self.nonterminals, start, rules)
        self.rules: Tuple[Rule, ...] = tuple(sorted(rules, key=lambda r: order.get(r.lhs, -1)))
        by: Dict[str, List[Rule]] = {n: [] for n in self.nonterminals}
        for r in self.rules:
            by[r.lhs].append(r)
        self._by_lhs = {n: tuple(v) for n, v in by.items()}
        self._hash = None

    def rules_for(self, N: str) -> Tuple[Rule, ...]:
        return self._by_lhs[N]

    def is_terminal(self, sym: str) -> bool:
        return sym in self.terminals

    def word(self, w) -> Word:
        """Normalize a word given as a string or a sequence of terminals."""
        if isinstance(w, str):
            if any(len(t) != 1 for t in self.terminals) and w:
                raise GrammarError("multi-character terminals: give words as sequences")
            w = tuple(w)
        w = tuple(w)
        bad = [a for a in w if a not in self.terminals]
        if bad:
            raise GrammarError(f"symbols {bad} are not terminals")
        return w

    def with_start(self, start: str) -> "Grammar":
        return Grammar(self.terminals, self.nonterminals, start, self.rules)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return (self.terminals, self.nonterminals, self.start, self.rules) == \
            (other.terminals, other.nonterminals, other.start, other.rules)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.terminals, self.nonterminals, self.start, self.rules))
        return self._hash

    def __repr__(self) -> str:
        return (f"Grammar({len(self.terminals)} terminals, {len(self.nonterminals)} nonterminals, "
                f"{len(self.rules)} rules, start={self.start!r})")

    def to_text(self) -> str:
        lines = ["terminals: " + " ".join(self.terminals),
                 "nonterminals: " + " ".join(self.nonterminals),
                 f"start: {self.start}"]
        for n in self.nonterminals:
            alts = [" ".join(r.rhs) + (f" [weight={r.weight}]" if r.weight != 1 else "")
                    for r in self._by_lhs[n]]
            if alts:
                lines.append(f"{n} -> " + " | ".join(alts))
        return "\n".join(lines) + "\n"


def _validate(terminals, nonterminals, start, rules, where: Sequence[str] = ()) -> None:
    """Collect every problem; ``where[i]`` locates rule ``i`` in its source text."""
    problems = []
    if len(set(terminals)) != len(terminals):
        problems.append("duplicate terminal")
    if len(set(nonterminals)) != len(nonterminals):
        problems.append("duplicate nonterminal")
    clash = set(terminals) & set(nonterminals)
    if clash:
        problems.append(f"symbols both terminal and nonterminal: {sorted(clash)}")
    if start not in nonterminals:
        problems.append(f"start symbol {start!r} is not a nonterminal")
    known = set(terminals) | set(nonterminals)
    for i, r in enumerate(rules):
        text = f"{r.lhs} -> {' '.join(r.rhs)}"
        if i < len(where):
            text = f"{where[i]}: {text}"
        if r.lhs not in nonterminals:
            problems.append(f"rule {text!r}: unknown left-hand side")
        if not r.rhs:
            problems.append(f"rule {text!r}: empty right-hand side")
        elif len(r.rhs) == 1 and r.rhs[0] in nonterminals:
            problems.append(f"rule {text!r}: right-hand side is a single nonterminal")
        unknown = [s for s in r.rhs if s not in known]
        if unknown:
            problems.append(f"rule {text!r}: unknown symbols {unknown}")
        if not isinstance(r.weight, int) or r.weight < 1:
            problems.append(f"rule {text!r}: weight must be a positive integer")
    if problems:
        raise GrammarError("improper grammar: " + "; ".join(problems))


_WEIGHT = re.compile(r"\[\s*weight\s*=\s*([^\]]*)\]\s*$")


def parse_grammar(text: str) -> Grammar:
    """Read the ``terminals:`` / ``nonterminals:`` / ``start:`` / rules format."""
    terminals = nonterminals = start = None
    rules: List[Rule] = []
    where: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("terminals:"):
            terminals = stripped[len("terminals:"):].split()
        elif stripped.startswith("nonterminals:"):
            nonterminals = stripped[len("nonterminals:"):].split()
        elif stripped.startswith("start:"):
            parts = stripped[len("start:"):].split()
            if len(parts) != 1:
                raise GrammarError(f"line {lineno}, column {col}: 'start:' takes one symbol")
            start = parts[0]
        elif "->" in stripped:
            lhs, _, body = stripped.partition("->")
            lhs = lhs.strip()
            if not lhs or len(lhs.split()) != 1:
                raise GrammarError(f"line {lineno}, column {col}: bad left-hand side {lhs!r}")
            offset = line.index("->") + 2     # 0-based start of the current alternative
            for alt in body.split("|"):
                width = len(alt)
                weight = 1
                m = _WEIGHT.search(alt)
                if m:
                    try:
                        weight = int(m.group(1))
                    except ValueError:
                        raise GrammarError(
                            f"line {lineno}, column {offset + m.start() + 1}: "
                            f"bad weight {m.group(1)!r}") from None
                    alt = alt[:m.start()]
                if "[" in alt or "]" in alt:
                    raise GrammarError(f"line {lineno}, column {offset + alt.find('[') + 1}: "
                                       f"malformed annotation in {alt.strip()!r}")
                rules.append(Rule(lhs, tuple(alt.split()), weight))
                where.append(f"line {lineno}, column {offset + len(alt) - len(alt.lstrip()) + 1}")
                offset += width + 1
        else:
            raise GrammarError(f"line {lineno}, column {col}: cannot parse {stripped!r}")
    if terminals is None or nonterminals is None or start is None:
        raise GrammarError("grammar needs 'terminals:', 'nonterminals:' and 'start:' lines")
    _validate(terminals, nonterminals, start, rules, where)
    return Grammar(terminals, nonterminals, start, rules, check=False)


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

def count_derivations(g: Grammar, N: str, w) -> int:
    """Weighted number of leftmost derivations ``N =>* w``.

    Memoized over (suffix of a right-hand side, span of ``w``); since every
    symbol derives at least one letter, each symbol of a sentential form gets
    a nonempty span and the recursion is well founded.
    """
    w = g.word(w)
    if N not in g.nonterminals:
        raise GrammarError(f"unknown nonterminal {N!r}")
    n = len(w)

    @lru_cache(maxsize=None)
    def sym(X: str, i: int, j: int) -> int:
        if X in g.terminals:
            return 1 if j == i + 1 and w[i] == X else 0
        return sum(r.weight * seq(r.rhs, i, j) for r in g.rules_for(X))

    @lru_cache(maxsize=None)
    def seq(rhs: Tuple[str, ...], i: int, j: int) -> int:
        if not rhs:
            return 1 if i == j else 0
        head, rest = rhs[0], rhs[1:]
        total = 0
        for m in range(i + 1, j - len(rest) + 1):
            left = sym(head, i, m)
            if left:
                total += left * seq(rest, m, j)
        return total

    return sym(N, 0, n) if n else 0


def parikh(g: Grammar, w) -> Tuple[int, ...]:
    w = g.word(w)
    return tuple(w.count(a) for a in g.terminals)


def census_count(g: Grammar, N: str, v: Sequence[int]) -> int:
    """``sum over words w with Parikh vector v`` of ``[[N]]_w``."""
    v = tuple(v)
    if len(v) != len(g.terminals):
        raise GrammarError(f"vector has {len(v)} entries, grammar has {len(g.terminals)} terminals")
    index = {a: i for i, a in enumerate(g.terminals)}

    @lru_cache(maxsize=None)
    def sym(X: str, u: Tuple[int, ...]) -> int:
        if X in index:
            return 1 if sum(u) == 1 and u[index[X]] == 1 else 0
        return sum(r.weight * seq(r.rhs, u) for r in g.rules_for(X))

    @lru_cache(maxsize=None)
    def seq(rhs: Tuple[str, ...], u: Tuple[int, ...]) -> int:
        if not rhs:
            return 1 if not any(u) else 0
        head, rest = rhs[0], rhs[1:]
        if sum(u) < len(rhs):
            return 0
        total = 0
        room = sum(u) - len(rest)   # every symbol yields at least one letter
        for part in itertools.product(*(range(e + 1) for e in u)):
            if not any(part) or sum(part) > room:
                continue
            left = sym(head, part)
            if left:
                total += left * seq(rest, tuple(a - b for a, b in zip(u, part)))
        return total

    return sym(N, v) if any(v) else 0


def words_with_parikh(g: Grammar, v: Sequence[int]) -> Iterable[Word]:
    """All words whose letter counts are ``v`` (multiset permutations)."""
    letters = [a for a, e in zip(g.terminals, v) for _ in range(e)]
    seen = set()
    for perm in itertools.permutations(letters):
        if perm not in seen:
            seen.add(perm)
            yield perm


def all_words(alphabet: Sequence[str], max_len: int, min_len: int = 0) -> Iterable[Word]:
    for n in range(min_len, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


# ---------------------------------------------------------------------------
# census generating functions
# ---------------------------------------------------------------------------

def _ident(name: str) -> str:
    s = re.sub(r"\W", "_", name)
    return s if s and not s[0].isdigit() else "_" + s


def census_names(g: Grammar) -> Tuple[Tuple[str, ...], Dict[str, str]]:
    """Indeterminate names ``x1..xk`` and the variable name ``f_N`` of each nonterminal."""
    indets = tuple(f"x{i + 1}" for i in range(len(g.terminals)))
    taken = set(indets)
    names = {}
    for n in g.nonterminals:
        base = "f_" + _ident(n)
        cand, i = base, 0
        while cand in taken:
            i += 1
            cand = f"{base}_{i}"
        taken.add(cand)
        names[n] = cand
    return indets, names


def census_system(g: Grammar, first: Optional[str] = None) -> PolySystem:
    """One equation per nonterminal: ``f_N = sum weight * x^(letters) * f^(nonterminals)``.

    Indeterminate ``x_i`` stands for the ``i``-th declared terminal; ``first``
    (default: the start symbol) becomes the first variable.
    """
    first = g.start if first is None else first
    indets, names = census_names(g)
    order = [first] + [n for n in g.nonterminals if n != first]
    variables = tuple(names[n] for n in order)
    amb = indets + variables
    pos = {a: i for i, a in enumerate(g.terminals)}
    pos.update({n: len(indets) + j for j, n in enumerate(order)})
    rhs = []
    for n in order:
        terms: Dict[Tuple[int, ...], int] = {}
        for r in g.rules_for(n):
            e = [0] * len(amb)
            for s in r.rhs:
                e[pos[s]] += 1
            key = tuple(e)
            terms[key] = terms.get(key, 0) + r.weight
        rhs.append(Polynomial(amb, terms))
    return PolySystem(indets, variables, rhs)


# ---------------------------------------------------------------------------
# finite automata and the product construction
# ---------------------------------------------------------------------------

class DFA:
    """Complete deterministic automaton; ``delta[(state, letter)] -> state``."""

    def __init__(self, states: Sequence, alphabet: Sequence[str], start, accepting: Iterable,
                 delta: Mapping[Tuple, object]):
        self.states = tuple(states)
        self.alphabet = tuple(alphabet)
        self.start = start
        self.accepting = frozenset(accepting)
        self.delta = dict(delta)
        sset = set(self.states)
        if start not in sset or not self.accepting <= sset:
            raise ValueError("start/accepting states must be states")
        missing = [(q, a) for q in self.states for a in self.alphabet if (q, a) not in self.delta]
        if missing:
            raise ValueError(f"automaton is incomplete, e.g. no move for {missing[0]}")
        if any(t not in sset for t in self.delta.values()):
            raise ValueError("transition into an unknown state")

    def run(self, w: Sequence[str]):
        q = self.start
        for a in w:
            q = self.delta[(q, a)]
        return q

    def accepts(self, w: Sequence[str]) -> bool:
        return self.run(w) in self.accepting

    def complement(self) -> "DFA":
        return DFA(self.states, self.alphabet, self.start,
                   [q for q in self.states if q not in self.accepting], self.delta)


def universal_dfa(alphabet: Sequence[str]) -> DFA:
    return DFA([0], alphabet, 0, [0], {(0, a): 0 for a in alphabet})


def empty_dfa(alphabet: Sequence[str]) -> DFA:
    return DFA([0], alphabet, 0, [], {(0, a): 0 for a in alphabet})


def letter_bounded_dfa(order: Sequence[str], alphabet: Sequence[str]) -> DFA:
    """``o1* o2* ... ok*``: state ``i`` = inside block ``i``, state ``k`` = sink.

    Letters of ``alphabet`` missing from ``order`` lead to the sink.
    """
    k = len(order)
    pos = {a: i for i, a in enumerate(order)}
    delta = {}
    for q in range(k + 1):
        for a in alphabet:
            if q == k or a not in pos or pos[a] < q:
                delta[(q, a)] = k
            else:
                delta[(q, a)] = pos[a]
    return DFA(range(k + 1), alphabet, 0, range(k), delta)


def precedence_dfa(x: str, y: str, alphabet: Sequence[str]) -> DFA:
    """Words containing an ``x`` somewhere before a ``y``."""
    delta = {}
    for a in alphabet:
        delta[(0, a)] = 1 if a == x else 0
        delta[(1, a)] = 2 if a == y else 1
        delta[(2, a)] = 2
    return DFA([0, 1, 2], alphabet, 0, [2], delta)


def productive(g: Grammar) -> Set[str]:
    """Nonterminals deriving at least one word (standard emptiness fixpoint)."""
    prod: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in prod and all(s in g.terminals or s in prod for s in r.rhs):
                prod.add(r.lhs)
                changed = True
    return prod


def is_empty(g: Grammar, N: Optional[str] = None) -> bool:
    return (g.start if N is None else N) not in productive(g)


def prune(g: Grammar) -> Grammar:
    """Drop nonterminals that derive nothing or are unreachable from the start."""
    prod = productive(g)
    rules = [r for r in g.rules if r.lhs in prod and all(s in g.terminals or s in prod for s in r.rhs)]
    reach = {g.start}
    stack = [g.start]
    by: Dict[str, List[Rule]] = {}
    for r in rules:
        by.setdefault(r.lhs, []).append(r)
    while stack:
        n = stack.pop()
        for r in by.get(n, ()):
            for s in r.rhs:
                if s in g.nonterminals and s not in reach:
                    reach.add(s)
                    stack.append(s)
    keep = [n for n in g.nonterminals if n in reach]
    return Grammar(g.terminals, keep, g.start, [r for r in rules if r.lhs in reach])


def dfa_product(g: Grammar, a: DFA, start: Optional[str] = None) -> Grammar:
    """Grammar for ``[[start]]`` restricted to ``L(a)``, multiplicities intact.

    Nonterminal ``N<p,q>`` derives exactly the derivations of ``N`` on words
    leading ``a`` from state ``p`` to ``q``.  Each derivation tree of ``N`` on
    an accepted word lifts uniquely because ``a`` is deterministic.  The new
    start symbol copies the rules of ``N<q0,f>`` for every accepting ``f``,
    so no unit rule is introduced.
    """
    if not isinstance(a, DFA):
        raise TypeError("dfa_product needs a DFA")
    if set(a.alphabet) != set(g.terminals):
        raise ValueError(f"automaton alphabet {a.alphabet} differs from terminals {g.terminals}")
    start = g.start if start is None else start
    Q = a.states
    name = {}
    taken = set(g.terminals)
    for n in g.nonterminals:
        for p in Q:
            for q in Q:
                cand = f"{n}<{p},{q}>"
                while cand in taken:
                    cand += "'"
                taken.add(cand)
                name[(p, n, q)] = cand
    new_start = start + "'"
    while new_start in taken:
        new_start += "'"

    def lifts(rhs: Tuple[str, ...], p):
        """All (end state, lifted rhs) for ``rhs`` read from state ``p``."""
        if not rhs:
            yield p, ()
            return
        head, rest = rhs[0], rhs[1:]
        if head in g.terminals:
            q = a.delta[(p, head)]
            for end, tail in lifts(rest, q):
                yield end, (head,) + tail
        else:
            for q in Q:
                for end, tail in lifts(rest, q):
                    yield end, (name[(p, head, q)],) + tail

    rules = []
    for r in g.rules:
        for p in Q:
            for end, lifted in lifts(r.rhs, p):
                rules.append(Rule(name[(p, r.lhs, end)], lifted, r.weight))
                if r.lhs == start and p == a.start and end in a.accepting:
                    rules.append(Rule(new_start, lifted, r.weight))
    nts = [new_start] + [name[(p, n, q)] for n in g.nonterminals for p in Q for q in Q]
    return prune(Grammar(g.terminals, nts, new_start, rules))


def restrict_alphabet(g: Grammar, terminals: Sequence[str]) -> Grammar:
    """Same grammar over a reordered or enlarged terminal list."""
    if not set(g.terminals) <= set(terminals):
        raise ValueError("new terminal list must contain the old one")
    return Grammar(terminals, g.nonterminals, g.start, g.rules)


def disjoint_union(g1: Grammar, g2: Grammar, prefix1: str = "L.", prefix2: str = "R.") -> Tuple[Grammar, Dict[str, str], Dict[str, str]]:
    """Both grammars side by side (nonterminals renamed), common terminal list."""
    terms = list(g1.terminals) + [t for t in g2.terminals if t not in g1.terminals]
    m1 = {n: prefix1 + n for n in g1.nonterminals}
    m2 = {n: prefix2 + n for n in g2.nonterminals}
    if set(m1.values()) & set(terms) or set(m2.values()) & set(terms):
        raise ValueError("renamed nonterminals clash with terminals")
    rules = [Rule(m1[r.lhs], tuple(m1.get(s, s) for s in r.rhs), r.weight) for r in g1.rules]
    rules += [Rule(m2[r.lhs], tuple(m2.get(s, s) for s in r.rhs), r.weight) for r in g2.rules]
    nts = list(m1.values()) + list(m2.values())
    return Grammar(terms, nts, m1[g1.start], rules), m1, m2
