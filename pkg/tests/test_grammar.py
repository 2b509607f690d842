import random
from collections import Counter

import pytest

from algseries.grammar import (GrammarError, Rule, all_words, census_count, census_system,
                               count_derivations, dfa_product, disjoint_union, empty_dfa, is_empty,
                               letter_bounded_dfa, parse_grammar, parikh, precedence_dfa, prune,
                               universal_dfa, words_with_parikh)
from algseries.poly import parse_polynomial
from algseries.polysys import kleene_solve

SECTION_V = """\
terminals: a b c d
nonterminals: X Y
start: X
X -> a b | a X X b | c Y d
Y -> c d | c Y Y d
"""


def grammar(name, data_dir):
    return parse_grammar((data_dir / f"{name}.cfg").read_text())


def brute_force_count(g, N, w):
    """Weighted leftmost derivations found by expanding sentential forms."""
    w = tuple(w)
    total = 0
    frontier = Counter({(N,): 1})
    while frontier:
        nxt = Counter()
        for form, mult in frontier.items():
            i = next((j for j, s in enumerate(form) if s in g.nonterminals), None)
            if i is None:
                total += mult * (form == w)
                continue
            if form[:i] != w[:i] or len(form) > len(w):
                continue
            for r in g.rules_for(form[i]):
                nxt[form[:i] + r.rhs + form[i + 1:]] += mult * r.weight
        frontier = nxt
    return total


# -- format ------------------------------------------------------------------

def test_parse_example_grammar():
    g = parse_grammar(SECTION_V)
    assert len(g.rules) == 5
    assert g.rules_for("X")[1] == Rule("X", ("a", "X", "X", "b"))
    assert parse_grammar(g.to_text()) == g
    assert g.to_text() == SECTION_V


def test_weights_round_trip(data_dir):
    g = grammar("blocks", data_dir)
    assert [r.weight for r in g.rules_for("S")] == [1, 2]
    assert parse_grammar(g.to_text()) == g


@pytest.mark.parametrize("text,where", [
    ("terminals: a\nnonterminals: X\nstart: X\nX -> X\n", "line 4, column 6"),
    ("terminals: a\nnonterminals: X\nstart: X\nX -> a |\n", "line 4, column 9"),
    ("terminals: a\nnonterminals: X\nstart: X\nX -> a [weight=2] | a z\n", "line 4, column 21"),
    ("terminals: a\nnonterminals: X\nstart: X\nX -> a z\n", ""),
    ("terminals: a\nnonterminals: X\nstart: X\nX -> a [weight=0]\n", ""),
    ("terminals: a\nnonterminals: X\nstart: X\nX -> a [weight=two]\n", "line 4, column 8"),
    ("terminals: a\nnonterminals: X\nstart: Z\nX -> a\n", ""),
    ("terminals: a\nnonterminals: a\nstart: a\n", ""),
    ("terminals: a\nstart: X\nX -> a\n", ""),
    ("terminals: a\nnonterminals: X\nstart: X\nX => a\n", "line 4, column 1"),
])
def test_parse_errors(text, where):
    with pytest.raises(GrammarError) as info:
        parse_grammar(text)
    assert where in str(info.value)


# -- counting -------------------------------------------------------------------

def test_count_examples(data_dir):
    dyck = grammar("dyck", data_dir)
    g = parse_grammar(SECTION_V)
    assert count_derivations(dyck, "S", "abab") == brute_force_count(dyck, "S", "abab") == 0
    assert count_derivations(dyck, "S", "aabbab") == 1
    assert count_derivations(g, "Y", "ccdd") == brute_force_count(g, "Y", "ccdd") == 0
    assert count_derivations(g, "Y", "ccdcdd") == 1
    assert count_derivations(g, "X", "cd") == 0 and count_derivations(g, "Y", "cd") == 1
    for N in ("X", "Y"):
        assert count_derivations(g, N, "") == 0


def test_count_against_brute_force(data_dir):
    rng = random.Random(0)
    for path in sorted(data_dir.glob("*.cfg")):
        g = parse_grammar(path.read_text())
        words = list(all_words(g.terminals, 5))
        for w in rng.sample(words, min(60, len(words))):
            for N in g.nonterminals:
                assert count_derivations(g, N, w) == brute_force_count(g, N, w), (path.name, N, w)


def test_ambiguous_grammar_counts_binary_trees(data_dir):
    g = grammar("ambiguous", data_dir)
    catalan = [1, 1, 2, 5, 14, 42]
    for n in range(1, 7):
        assert count_derivations(g, "S", "a" * n) == catalan[n - 1]


def test_census_examples(data_dir):
    g = parse_grammar(SECTION_V)
    assert census_count(g, "Y", (0, 0, 2, 2)) == 0
    assert census_count(g, "Y", (0, 0, 3, 3)) == 1
    dyck = grammar("dyck", data_dir)
    got = [census_count(dyck, "S", (n, n)) for n in range(1, 6)]
    oracle = [sum(brute_force_count(dyck, "S", w) for w in words_with_parikh(dyck, (n, n)))
              for n in range(1, 6)]
    assert got == oracle == [1, 1, 2, 4, 9]
    assert census_count(dyck, "S", (0, 0)) == 0
    with pytest.raises(GrammarError):
        census_count(dyck, "S", (1,))


def test_unary_census_is_word_count():
    g = parse_grammar("terminals: a\nnonterminals: S T\nstart: S\nS -> a | S T | a S a [weight=3]\nT -> a | T T\n")
    for n in range(1, 9):
        for N in g.nonterminals:
            assert census_count(g, N, (n,)) == count_derivations(g, N, "a" * n)


def test_duplicate_rule_equals_weight_two():
    dup = parse_grammar("terminals: a b\nnonterminals: S\nstart: S\nS -> a b | a S b | a S b\n")
    wgt = parse_grammar("terminals: a b\nnonterminals: S\nstart: S\nS -> a b | a S b [weight=2]\n")
    for w in all_words("ab", 8):
        assert count_derivations(dup, "S", w) == count_derivations(wgt, "S", w)
    assert census_system(dup) == census_system(wgt)


# -- census systems ----------------------------------------------------------------

def test_census_system_of_example_grammar():
    s = census_system(parse_grammar(SECTION_V))
    assert s.indets == ("x1", "x2", "x3", "x4") and s.variables == ("f_X", "f_Y")
    amb = s.ambient
    assert s.rhs[0] == parse_polynomial("x1*x2 + x1*x2*f_X^2 + x3*x4*f_Y", amb)
    assert s.rhs[1] == parse_polynomial("x3*x4 + x3*x4*f_Y^2", amb)


def test_census_system_small_cases(data_dir):
    s = census_system(parse_grammar("terminals: a\nnonterminals: S\nstart: S\nS -> a\n"))
    assert s.rhs[0] == parse_polynomial("x1", s.ambient)
    s = census_system(grammar("dyck", data_dir))
    assert s.rhs[0] == parse_polynomial("x1*x2 + x1*x2*f_S + x1*x2*f_S^2", s.ambient)
    s = census_system(parse_grammar(SECTION_V), "Y")
    assert s.variables == ("f_Y", "f_X")


def test_census_functions_match_enumeration(data_dir):
    g = parse_grammar(SECTION_V)
    (fX, fY) = kleene_solve(census_system(g), 6)
    for v in [(1, 1, 0, 0), (0, 0, 1, 1), (2, 2, 0, 0), (1, 1, 1, 1), (0, 0, 3, 3)]:
        oracle_x = sum(brute_force_count(g, "X", w) for w in words_with_parikh(g, v))
        oracle_y = sum(brute_force_count(g, "Y", w) for w in words_with_parikh(g, v))
        assert fX.coeff(v) == oracle_x and fY.coeff(v) == oracle_y


# -- automata and products ------------------------------------------------------------

def test_dfa_shapes():
    lb = letter_bounded_dfa(("a", "b"), ("a", "b", "c"))
    assert lb.accepts("aabb") and lb.accepts("") and lb.accepts("b")
    assert not lb.accepts("ba") and not lb.accepts("c")
    pre = precedence_dfa("b", "a", ("a", "b"))
    assert pre.accepts("aba") and not pre.accepts("aabb")
    assert lb.complement().accepts("ba")
    with pytest.raises(ValueError):
        type(lb)([0], ("a",), 0, [0], {})


def test_products(data_dir):
    g = parse_grammar(SECTION_V)
    same = dfa_product(g, universal_dfa(g.terminals))
    for w in all_words(g.terminals, 6):
        assert count_derivations(same, same.start, w) == count_derivations(g, "X", w)
    none = dfa_product(g, empty_dfa(g.terminals))
    assert is_empty(none)
    dyck = grammar("dyck", data_dir)
    cut = dfa_product(dyck, letter_bounded_dfa(("a", "b"), dyck.terminals))
    for w in all_words("ab", 8):
        want = count_derivations(dyck, "S", w) if "ba" not in "".join(w) else 0
        assert count_derivations(cut, cut.start, w) == want


def test_emptiness_and_pruning():
    g = parse_grammar("terminals: a\nnonterminals: S L\nstart: S\nS -> a | a L\nL -> a L\n")
    assert is_empty(g, "L") and not is_empty(g, "S")
    p = prune(g)
    assert "L" not in p.nonterminals
    for w in all_words("a", 5):
        assert count_derivations(p, p.start, w) == count_derivations(g, "S", w)


def test_disjoint_union(data_dir):
    d1, d2 = grammar("dyck", data_dir), grammar("anbn", data_dir)
    g, m1, m2 = disjoint_union(d1, d2)
    for w in all_words("ab", 6):
        assert count_derivations(g, m1["S"], w) == count_derivations(d1, "S", w)
        assert count_derivations(g, m2["S"], w) == count_derivations(d2, "S", w)


def test_parikh():
    g = parse_grammar(SECTION_V)
    assert parikh(g, "acdbb") == (1, 2, 1, 1)
    assert sorted(words_with_parikh(g, (1, 1, 0, 0))) == [("a", "b"), ("b", "a")]
