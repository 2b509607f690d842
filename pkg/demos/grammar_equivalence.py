"""Counting derivations and comparing grammars by multiplicity.

Run from the repository root:  python3 demos/grammar_equivalence.py
"""
from pathlib import Path

from algseries import (BoundConfig, census_count, census_equiv, count_derivations,
                       find_letter_bounded_order, multiplicity_equiv_bounded, parse_grammar)
from algseries.grammar import disjoint_union

DATA = Path(__file__).resolve().parent.parent / "data"
B = BoundConfig.explicit(8)


def load(name):
    return parse_grammar((DATA / f"{name}.cfg").read_text())


balanced, dyck, blocks = load("balanced"), load("dyck"), load("blocks")

print("derivation counts in", dyck.to_text().splitlines()[-1])
for w in ("ab", "aabb", "abab", "aabbab"):
    print(f"  {w:8s}", count_derivations(dyck, "S", w))

# The census forgets letter order: it sums counts over all words with a given letter tally.
print("census of S on (n, n):", [census_count(dyck, "S", (n, n)) for n in range(1, 7)])

v = census_equiv(balanced, "X", balanced, "Y", B)
print("X vs Y:", "equivalent" if v.equivalent else f"differ on {' '.join(v.witness_word)} {v.counts}",
      f"[{v.scope}]")

# Equal census does not mean equal word counts when the language is not letter-bounded.
variant = parse_grammar("terminals: a b\nnonterminals: S\nstart: S\nS -> a b | a S b | a S S b\n")
v = census_equiv(dyck, "S", variant, "S", B)
print("Dyck vs aSSb variant by census:", v.equivalent, f"[{v.scope}]")
print("  but on aababb:", count_derivations(dyck, "S", "aababb"), "vs",
      count_derivations(variant, "S", "aababb"))

# Restricting to words in (ab)* makes the comparison exact there.
ab_star = parse_grammar("terminals: a b\nnonterminals: S\nstart: S\nS -> a b | a b S\n")
g, m1, m2 = disjoint_union(dyck, ab_star)
v = multiplicity_equiv_bounded(g, m1["S"], m2["S"], [("a", "b")], B)
print("Dyck vs (ab)+ on (ab)*:", "equivalent" if v.equivalent else
      f"differ on {''.join(v.witness_word)} {v.counts}", f"[{v.scope}]")

print("letter order for blocks:", find_letter_bounded_order(blocks, "S").order)
