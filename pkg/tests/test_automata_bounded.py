from itertools import permutations

import pytest

from algseries import bounded
from algseries.automata import (PDA, Homomorphism, InfiniteMultiplicity, Move, PDAError, RunCountDiverges,
                                cfg_to_pda, count_runs, pda_inverse_hom, pda_to_cfg)
from algseries.bounded import (NotLetterBounded, bounded_pipeline, census_equiv, check_letter_bounded,
                               find_letter_bounded_order, multiplicity_equiv_bounded,
                               multiplicity_equiv_letter_bounded)
from algseries.decide import BoundConfig
from algseries.grammar import all_words, count_derivations, disjoint_union, parse_grammar

B8 = BoundConfig.explicit(8)


def grammar(name, data_dir):
    return parse_grammar((data_dir / f"{name}.cfg").read_text())


def g_text(rules, terminals="a b", nonterminals="S"):
    return parse_grammar(f"terminals: {terminals}\nnonterminals: {nonterminals}\nstart: "
                         f"{nonterminals.split()[0]}\n{rules}\n")


def looping_pda():
    """Epsilon self-loop on Z: infinitely many runs on "a"."""
    return PDA(["a"], ["Z", "#"], ["q0", "q", "f"], "q0", "#", ["f"], [
        Move("q0", "#", None, "q", ("Z", "#")),
        Move("q", "Z", None, "q", ("Z",)),
        Move("q", "Z", "a", "q", ()),
        Move("q", "#", None, "f", ()),
    ])


# -- pushdown automata ----------------------------------------------------------

def test_cfg_pda_round_trip(data_dir):
    for name, N in (("balanced", "X"), ("balanced", "Y"), ("ambiguous", "S"), ("blocks", "S")):
        g = grammar(name, data_dir)
        pda = cfg_to_pda(g, N)
        back, start = pda_to_cfg(pda)
        for w in all_words(g.terminals, 6 if len(g.terminals) <= 2 else 5):
            want = count_derivations(g, N, w)
            assert count_runs(pda, w) == want
            assert count_derivations(back, start, w) == want


def test_single_rule_automaton():
    g = g_text("S -> a", terminals="a")
    pda = cfg_to_pda(g)
    assert count_runs(pda, "a") == 1
    assert count_runs(pda, "") == 0 and count_runs(pda, "aa") == 0


def test_pda_validation():
    with pytest.raises(PDAError):
        PDA(["a"], ["#"], ["q"], "q", "#", ["f"], [])
    with pytest.raises(PDAError):
        PDA(["a"], ["#"], ["q"], "q", "#", ["q"], [Move("q", "#", "b", "q", ())])
    with pytest.raises(PDAError):
        count_runs(cfg_to_pda(g_text("S -> a b")), "c")


def test_infinite_multiplicity_is_reported():
    p = looping_pda()
    with pytest.raises(RunCountDiverges):
        count_runs(p, "a")
    with pytest.raises(InfiniteMultiplicity):
        pda_to_cfg(p)


def test_inverse_homomorphism_examples(data_dir):
    dyck = grammar("dyck", data_dir)
    pda = cfg_to_pda(dyck)
    ident = pda_inverse_hom(pda, Homomorphism.of({"a": "a", "b": "b"}))
    for w in all_words("ab", 4):
        assert count_runs(ident, w) == count_runs(pda, w)
    ab = pda_inverse_hom(pda, Homomorphism.of({"a1": "ab"}))
    assert count_runs(ab, ["a1"]) == count_runs(pda, "ab") == 1
    never = pda_inverse_hom(pda, Homomorphism.of({"a1": "ba"}))
    for n in range(5):
        assert count_runs(never, ["a1"] * n) == 0


def test_inverse_homomorphism_multiplicities(data_dir):
    g = grammar("ambiguous", data_dir)
    pda = cfg_to_pda(g)
    h = Homomorphism.of({"u": "ab", "v": "a", "w": "bab"})
    inv = pda_inverse_hom(pda, h)
    for w in all_words(h.source, 4):
        assert count_runs(inv, w) == count_derivations(g, "S", h.apply(w))


def test_homomorphism_checks(data_dir):
    with pytest.raises(ValueError):
        Homomorphism.of({"a1": ""})
    with pytest.raises(PDAError):
        pda_inverse_hom(cfg_to_pda(grammar("dyck", data_dir)), Homomorphism.of({"a1": "abc"}))


# -- letter-boundedness -------------------------------------------------------------

def test_check_letter_bounded_examples(data_dir):
    g = grammar("balanced", data_dir)
    assert not check_letter_bounded(g, "Y", ("c", "d"))
    assert count_derivations(g, "Y", "ccdcdd") == 1      # the d-before-c word
    assert check_letter_bounded(grammar("anbn", data_dir), "S", ("a", "b"))
    assert not check_letter_bounded(grammar("anbn", data_dir), "S", ("b", "a"))
    empty = g_text("S -> a S", terminals="a")
    assert check_letter_bounded(empty, "S", ("a",)) and check_letter_bounded(empty, "S", ())
    with pytest.raises(ValueError):
        check_letter_bounded(g, "Y", ("c", "c"))


def test_check_is_exact_against_enumeration(data_dir):
    for path in sorted(data_dir.glob("*.cfg")):
        g = parse_grammar(path.read_text())
        words = list(all_words(g.terminals, 8 if len(g.terminals) <= 3 else 6))
        for N in g.nonterminals:
            language = [w for w in words if count_derivations(g, N, w)]
            for order in permutations(g.terminals):
                violation = any(tuple(sorted(w, key=order.index)) != w for w in language)
                assert check_letter_bounded(g, N, order) == (not violation), (path.name, N, order)


def test_find_order_examples(data_dir):
    assert find_letter_bounded_order(grammar("anbn", data_dir), "S").order == ("a", "b")
    rev = g_text("S -> b a | b S a")
    assert find_letter_bounded_order(rev, "S").order == ("b", "a")
    both = find_letter_bounded_order(g_text("S -> a b | b a"), "S")
    assert both.order is None and both.status == "not-bounded" and set(both.conflict) == {"a", "b"}
    assert find_letter_bounded_order(g_text("S -> a | a S", terminals="a"), "S").order == ("a",)
    blocks = find_letter_bounded_order(grammar("blocks", data_dir), "S")
    assert blocks.order == ("a", "b", "c")


# -- equivalence ------------------------------------------------------------------

def test_letter_bounded_equivalence(data_dir):
    g = g_text("S -> a b | a S b\nT -> a b | a T b", nonterminals="S T")
    v = multiplicity_equiv_letter_bounded(g, "S", "T", ("a", "b"), B8)
    assert v.equivalent and v.scope == "all words"
    g = g_text("S -> a b | a S b\nT -> a b | a T b | a a T b b", nonterminals="S T")
    v = multiplicity_equiv_letter_bounded(g, "S", "T", ("a", "b"), B8)
    assert not v.equivalent
    assert v.witness_word == ("a", "a", "a", "b", "b", "b") and v.counts == (1, 2)
    assert v.counts == (count_derivations(g, "S", v.witness_word), count_derivations(g, "T", v.witness_word))


def test_letter_bounded_procedure_refuses_unbounded_input(data_dir):
    g = grammar("balanced", data_dir)
    with pytest.raises(NotLetterBounded) as info:
        multiplicity_equiv_letter_bounded(g, "X", "Y", ("a", "b", "c", "d"), B8)
    assert "occur in both orders" in str(info.value)
    d, m1, m2 = disjoint_union(grammar("dyck", data_dir), grammar("dyck", data_dir))
    with pytest.raises(NotLetterBounded):
        multiplicity_equiv_letter_bounded(d, m1["S"], m2["S"], ("a", "b"), B8)


def test_census_equivalence_examples(data_dir):
    g = grammar("balanced", data_dir)
    v = census_equiv(g, "X", g, "Y", B8)
    assert not v.equivalent and v.witness_word == ("c", "d") and v.counts == (0, 1)
    assert v.scope != "all words"
    dyck = grammar("dyck", data_dir)
    assert census_equiv(dyck, "S", dyck, "S", B8).equivalent
    a = grammar("anbn", data_dir)
    v = census_equiv(a, "S", a, "S", B8)
    assert v.equivalent and v.scope == "all words"


def test_census_equality_does_not_settle_unbounded_languages(data_dir):
    dyck = grammar("dyck", data_dir)
    variant = g_text("S -> a b | a S b | a S S b")
    differing = [w for w in all_words("ab", 8)
                 if count_derivations(dyck, "S", w) != count_derivations(variant, "S", w)]
    assert differing and min(len(w) for w in differing) == 6
    v = census_equiv(dyck, "S", variant, "S", B8)
    assert v.equivalent and v.scope == "census (Parikh images) only"


def test_bounded_equivalence_examples(data_dir):
    dyck = grammar("dyck", data_dir)
    assert multiplicity_equiv_bounded(dyck, "S", "S", [("a", "b")], B8).equivalent
    ab_star = g_text("S -> a b | a b S")
    g, m1, m2 = disjoint_union(dyck, ab_star)
    v = multiplicity_equiv_bounded(g, m1["S"], m2["S"], [("a", "b")], B8)
    assert not v.equivalent
    assert v.witness_word == ("a", "b", "a", "b") and v.counts == (0, 1)
    assert v.scope == "words in (ab)*"


def test_restriction_masks_differences_outside_the_shape(data_dir):
    g = g_text("S -> a b | a S b | a S b S\nT -> a b | a T b | a T b T | b a", nonterminals="S T")
    assert count_derivations(g, "S", "ba") != count_derivations(g, "T", "ba")
    assert multiplicity_equiv_bounded(g, "S", "T", [("a",), ("b",)], B8).equivalent
    v = multiplicity_equiv_bounded(g, "S", "T", [("b",), ("a",)], B8)
    assert not v.equivalent and v.witness_word == ("b", "a")


def test_unary_pipeline_agrees_with_census():
    g1 = g_text("S -> a | a S\nT -> a | T T\nU -> a | a U\nV -> a a | a V a", terminals="a",
                nonterminals="S T U V")
    for N1, N2 in (("S", "T"), ("S", "U"), ("U", "V"), ("T", "T")):
        via_pipeline = multiplicity_equiv_bounded(g1, N1, N2, [("a",)], B8).equivalent
        via_census = census_equiv(g1, N1, g1, N2, B8).equivalent
        assert via_pipeline == via_census


def test_pipeline_objects(data_dir):
    g = grammar("blocks", data_dir)
    pl = bounded_pipeline(g, "S", [("a",), ("b", "c"), ("c",)])
    assert pl.homomorphism.source == ("a1", "a2", "a3")
    assert check_letter_bounded(pl.restricted, pl.restricted.start, ("a1", "a2", "a3"))
    with pytest.raises(ValueError):
        bounded_pipeline(g, "S", [("a",), ()])


def test_pipeline_failures_name_the_stage(data_dir, monkeypatch):
    def boom(_):
        raise InfiniteMultiplicity("forced")
    monkeypatch.setattr(bounded, "pda_to_cfg", boom)
    with pytest.raises(RuntimeError, match="pda_to_cfg"):
        bounded_pipeline(grammar("dyck", data_dir), "S", [("a",), ("b",)])
