"""Letter-boundedness and multiplicity equivalence on bounded languages.

For a language inside ``s1* s2* ... sk*`` the Parikh map is injective, so two
nonterminals have the same multiplicities iff their census generating
functions coincide; that reduces equivalence to zeroness of the solution
of a difference system.  Bounded languages ``w1* ... wk*`` are first pulled
back along ``a_i -> w_i`` (automaton, inverse homomorphism, grammar) and then
intersected with ``a1* ... ak*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .automata import Homomorphism, cfg_to_pda, pda_inverse_hom, pda_to_cfg
from .decide import BoundConfig, ZeroVerdict, difference_system, eq_alg
from .grammar import (Grammar, GrammarError, count_derivations, census_system, dfa_product,
                      disjoint_union, is_empty, letter_bounded_dfa, precedence_dfa,
                      words_with_parikh)


class NotLetterBounded(ValueError):
    pass


def _check_order(g: Grammar, order: Sequence[str]) -> Tuple[str, ...]:
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ValueError(f"order {order} repeats a letter")
    unknown = [a for a in order if a not in g.terminals]
    if unknown:
        raise ValueError(f"order mentions non-terminals-of-the-alphabet {unknown}")
    return order


def check_letter_bounded(g: Grammar, N: str, order: Sequence[str]) -> bool:
    """Exact test of ``L(N) <= o1* ... ok*``.

    ``order`` lists distinct terminals; terminals it omits may not occur at
    all.  Implemented as emptiness of ``L(N)`` intersected with the
    complement of the block language.
    """
    order = _check_order(g, order)
    bad = letter_bounded_dfa(order, g.terminals).complement()
    return is_empty(dfa_product(g, bad, start=N))


def precedence_pairs(g: Grammar, N: str) -> Dict[Tuple[str, str], bool]:
    """``(x, y) -> True`` iff some word of ``L(N)`` has an ``x`` before a ``y`` (x != y)."""
    out = {}
    for x in g.terminals:
        for y in g.terminals:
            if x != y:
                out[(x, y)] = not is_empty(dfa_product(g, precedence_dfa(x, y, g.terminals), start=N))
    return out


@dataclass(frozen=True)
class OrderSearch:
    order: Optional[Tuple[str, ...]]
    status: str                    # "bounded" | "not-bounded"
    conflict: Optional[Tuple[str, str]] = None


def find_letter_bounded_order(g: Grammar, N: str) -> OrderSearch:
    """A witnessing letter order, or a pair of letters occurring in both orders.

    ``L(N)`` fits some ``s_pi(1)* ... s_pi(k)*`` iff the relation "x occurs
    before y in some word" (x != y) is acyclic; any topological order of it
    works.  Each pair test is one product with a three-state automaton plus
    an emptiness check, so the search is polynomial and never gives up.
    The answer is re-verified with :func:`check_letter_bounded`.
    """
    rel = precedence_pairs(g, N)
    succ = {a: [b for b in g.terminals if rel.get((a, b))] for a in g.terminals}
    indeg = {a: 0 for a in g.terminals}
    for a in g.terminals:
        for b in succ[a]:
            indeg[b] += 1
    order: List[str] = []
    ready = [a for a in g.terminals if indeg[a] == 0]
    while ready:
        a = ready.pop(0)
        order.append(a)
        for b in succ[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
        ready.sort(key=g.terminals.index)
    if len(order) < len(g.terminals):
        left = [a for a in g.terminals if a not in order]
        conflict = next(((x, y) for x in left for y in left if rel.get((x, y)) and _reaches(succ, y, x)),
                        None)
        return OrderSearch(None, "not-bounded", conflict)
    if not check_letter_bounded(g, N, order):
        raise AssertionError("topological order failed verification")
    return OrderSearch(tuple(order), "bounded")


def _reaches(succ, a, b) -> bool:
    seen, stack = {a}, [a]
    while stack:
        x = stack.pop()
        if x == b:
            return True
        for y in succ[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Outcome of a multiplicity comparison.

    ``equivalent`` is relative to ``D`` (and to ``scope``); a witness is
    always re-checked by derivation counting before it is returned.
    """

    equivalent: bool
    D: int
    conditional: bool
    scope: str
    witness_word: Optional[Tuple[str, ...]] = None
    witness_vector: Optional[Tuple[int, ...]] = None
    counts: Optional[Tuple[int, int]] = None
    trace: Tuple[str, ...] = ()

    def to_record(self) -> Dict:
        rec = {"problem": "equiv", "verdict": "equivalent" if self.equivalent else "inequivalent",
               "bound": self.D, "conditional": self.conditional, "scope": self.scope,
               "trace": list(self.trace)}
        if not self.equivalent:
            rec["witness"] = list(self.witness_vector)
            if self.witness_word is not None:
                rec["word"] = " ".join(self.witness_word)
            rec["counts"] = list(self.counts)
        else:
            rec["note"] = f"census functions agree up to degree {self.D}"
        return rec


def _census_difference(g: Grammar, N1: str, N2: str):
    s1 = census_system(g, N1)
    s2 = census_system(g, N2)
    return difference_system(s1, s2)


def multiplicity_equiv_letter_bounded(g: Grammar, N1: str, N2: str, order: Sequence[str],
                                      bounds: BoundConfig, engine: str = "auto") -> EquivalenceVerdict:
    """Decide ``[[N1]] = [[N2]]`` when both languages lie in ``o1* ... ok*``."""
    order = _check_order(g, order)
    trace = []
    for N in (N1, N2):
        if not check_letter_bounded(g, N, order):
            found = find_letter_bounded_order(g, N)
            hint = (f"; it is bounded for order {' '.join(found.order)}" if found.order
                    else f"; letters {found.conflict} occur in both orders" if found.conflict
                    else "")
            raise NotLetterBounded(f"L({N}) is not contained in {'* '.join(order)}*{hint}")
        trace.append(f"letter-bounded check {N}: ok")
    diff = _census_difference(g, N1, N2)
    trace.append(f"census difference system: {diff.ell} variables")
    z = eq_alg(diff, bounds, engine=engine)
    trace.append(f"zeroness ({z.engine}) up to degree {z.D}")
    scope = "all words"
    if z.zero:
        return EquivalenceVerdict(True, z.D, z.conditional, scope, trace=tuple(trace))
    v = z.witness
    pos = {a: i for i, a in enumerate(g.terminals)}
    word = tuple(a for a in order for _ in range(v[pos[a]]))
    c1, c2 = count_derivations(g, N1, word), count_derivations(g, N2, word)
    if c1 == c2:
        raise AssertionError(f"witness {word} not confirmed by derivation counting")
    trace.append("witness confirmed by derivation counting")
    return EquivalenceVerdict(False, z.D, z.conditional, scope, word, tuple(v), (c1, c2), tuple(trace))


def census_equiv(g1: Grammar, N1: str, g2: Grammar, N2: str, bounds: BoundConfig,
                 engine: str = "auto") -> EquivalenceVerdict:
    """Compare census generating functions of two nonterminals.

    Census inequality always proves inequivalence (the witness Parikh vector
    is confirmed by summing derivation counts over all its words).  Census
    equality implies equivalence only for letter-bounded languages; the
    verdict's ``scope`` says which case applies.
    """
    g, m1, m2 = disjoint_union(g1, g2)
    a, b = m1[N1], m2[N2]
    trace = []
    bounded = all(find_letter_bounded_order(g, N).order is not None for N in (a, b))
    trace.append("letter-bounded: yes" if bounded else "letter-bounded: no")
    diff = _census_difference(g, a, b)
    trace.append(f"census difference system: {diff.ell} variables")
    z = eq_alg(diff, bounds, engine=engine)
    trace.append(f"zeroness ({z.engine}) up to degree {z.D}")
    scope = "all words" if bounded else "census (Parikh images) only"
    if z.zero:
        return EquivalenceVerdict(True, z.D, z.conditional, scope, trace=tuple(trace))
    v = z.witness
    words = list(words_with_parikh(g, v))
    c1 = sum(count_derivations(g, a, w) for w in words)
    c2 = sum(count_derivations(g, b, w) for w in words)
    if c1 == c2:
        raise AssertionError(f"census witness {v} not confirmed")
    differing = next(w for w in words if count_derivations(g, a, w) != count_derivations(g, b, w))
    trace.append("witness confirmed by derivation counting")
    return EquivalenceVerdict(False, z.D, z.conditional, scope, differing, tuple(v),
                              (count_derivations(g, a, differing), count_derivations(g, b, differing)),
                              tuple(trace))


@dataclass(frozen=True)
class BoundedPipeline:
    """Intermediate objects of the restriction to ``w1* ... wk*`` for one nonterminal."""

    homomorphism: Homomorphism
    pulled_back: Grammar          # [[S]]_w = [[N]]_{h(w)} for every word w
    restricted: Grammar           # the same, intersected with a1* ... ak*


def fresh_letters(k: int, avoid: Sequence[str] = ()) -> Tuple[str, ...]:
    out = []
    i = 1
    while len(out) < k:
        cand = f"a{i}"
        if cand not in avoid:
            out.append(cand)
        i += 1
    return tuple(out)


def bounded_pipeline(g: Grammar, N: str, words: Sequence[Sequence[str]],
                     letters: Optional[Sequence[str]] = None) -> BoundedPipeline:
    words = [g.word(w) for w in words]
    if any(not w for w in words):
        raise ValueError("bounded-language words must be nonempty")
    letters = tuple(letters) if letters is not None else fresh_letters(len(words))
    h = Homomorphism.of(dict(zip(letters, words)))
    stage = "cfg_to_pda"
    try:
        pda = cfg_to_pda(g, N)
        stage = "pda_inverse_hom"
        inv = pda_inverse_hom(pda, h)
        stage = "pda_to_cfg"
        pulled, _ = pda_to_cfg(inv)
        stage = "dfa_product"
        restricted = dfa_product(pulled, letter_bounded_dfa(letters, letters))
    except Exception as exc:
        raise RuntimeError(f"bounded pipeline failed at stage {stage}: {exc}") from exc
    return BoundedPipeline(h, pulled, restricted)


def multiplicity_equiv_bounded(g: Grammar, N1: str, N2: str, words: Sequence[Sequence[str]],
                               bounds: BoundConfig, engine: str = "auto") -> EquivalenceVerdict:
    """Decide ``[[N1]]_w = [[N2]]_w`` for every ``w`` in ``w1* ... wk*``."""
    p1 = bounded_pipeline(g, N1, words)
    p2 = bounded_pipeline(g, N2, words)
    h = p1.homomorphism
    letters = h.source
    joint, m1, m2 = disjoint_union(p1.restricted, p2.restricted)
    trace = ["cfg_to_pda", "pda_inverse_hom", "pda_to_cfg", "dfa_product"]
    v = multiplicity_equiv_letter_bounded(joint, m1[p1.restricted.start], m2[p2.restricted.start],
                                          letters, bounds, engine)
    trace += list(v.trace)
    scope = "words in " + " ".join("(" + "".join(w) + ")*" for _, w in h.images)
    if v.equivalent:
        return EquivalenceVerdict(True, v.D, v.conditional, scope, trace=tuple(trace))
    image = h.apply(v.witness_word)
    c1, c2 = count_derivations(g, N1, image), count_derivations(g, N2, image)
    if c1 == c2:
        raise AssertionError(f"witness {image} not confirmed on the original grammar")
    trace.append("witness confirmed on the original grammar")
    return EquivalenceVerdict(False, v.D, v.conditional, scope, image, v.witness_vector,
                              (c1, c2), tuple(trace))
