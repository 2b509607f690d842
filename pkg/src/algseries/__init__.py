"""Exact computation with algebraic power series given by proper polynomial systems."""
from .poly import AmbientMismatch, ParseError, Polynomial, parse_polynomial, poly_add, poly_mul, poly_sub, reduce_mod_p
from .series import (NotAUnit, PrecisionError, SeriesRing, TruncatedSeries, Valuation, ord_,
                     series_invert_unit, series_trunc_mul, tail)
from .circuit import (Circuit, CircuitBuilder, adjugate_circuits, balance_alternate, degree_probe,
                      degree_reversal_circuit, determinant_circuit, eval_mod_p, eval_series,
                      geometric_sum_circuit, parse_circuit)
from .polysys import (PolySystem, RationalApproximant, derivative_matrix, hensel_step,
                      kleene_solve, parse_system, polynomial_approximant, rational_approximant,
                      validate_proper)
from .decide import (BoundConfig, CoeffQuery, coeff_alg, difference_system, eq_alg,
                     eq_alg_reduction_circuit, fin_alg, slp_to_system)
from .grammar import (DFA, Grammar, Rule, census_count, census_system, count_derivations,
                      dfa_product, letter_bounded_dfa, parse_grammar)
from .automata import PDA, Homomorphism, cfg_to_pda, count_runs, pda_inverse_hom, pda_to_cfg
from .bounded import (EquivalenceVerdict, census_equiv, check_letter_bounded,
                      find_letter_bounded_order, multiplicity_equiv_bounded,
                      multiplicity_equiv_letter_bounded)

__version__ = "0.1.0"
