"""Catalan numbers three ways: fixpoint iteration, Newton stages, and a compiled circuit.

Run from the repository root:  python3 demos/catalan_walkthrough.py
"""
from pathlib import Path

from algseries import (CoeffQuery, coeff_alg, eval_series, kleene_solve, parse_system,
                       polynomial_approximant)
from algseries.polysys import stage_for_degree

DATA = Path(__file__).resolve().parent.parent / "data"

s = parse_system((DATA / "catalan.sys").read_text())
print("system:", s.variables[0], "=", s.rhs[0].to_str())

# Fixpoint iteration gains at least one correct degree per round.
(y,) = kleene_solve(s, 12)
print("Kleene, degree < 12:", y.body.to_str())

# Newton doubles the precision: stage n is exact below degree 2^n.
for n in range(1, 5):
    E = polynomial_approximant(s, n)
    got = eval_series(E, n=(1 << n) - 1).body
    print(f"stage {n}: {len(E.gates):4d} gates, exact below degree {1 << n}:", got.to_str())

# Large coefficients modulo a prime, without writing the series out.
D = 60
print(f"degree {D} needs stage {stage_for_degree(D)}")
for p in (10007, 65537):
    a = coeff_alg(s, CoeffQuery((D,), p), "hensel")
    b = coeff_alg(s, CoeffQuery((D,), p), "kleene")
    print(f"  coefficient of x^{D} mod {p}: hensel {a}, kleene {b}")
