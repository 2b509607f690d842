import random
import warnings

import pytest

from gen import exponent_vectors, random_circuit, random_proper_system
from algseries.circuit import (CircuitBuilder, const_circuit, eval_series, geometric_sum_circuit,
                               input_circuit)
from algseries.decide import (BoundConfig, BoundTooLarge, CoeffQuery, CompositeModulusWarning, coeff_alg,
                              difference_system, eq_alg, eq_alg_reduction_circuit, fin_alg,
                              is_probable_prime, probe_reduction, resolve_engine, slp_to_system,
                              solution_series)
from algseries.grammar import census_system, parse_grammar
from algseries.polysys import kleene_solve, parse_system, validate_proper
from algseries.series import TruncatedSeries, ord_, series_trunc_mul

PRIMES = (10007, 65537, 2**31 - 1)


@pytest.fixture
def example1(data_dir):
    return parse_system((data_dir / "example1.sys").read_text())


@pytest.fixture
def catalan(data_dir):
    return parse_system((data_dir / "catalan.sys").read_text())


def test_primality():
    primes = [p for p in range(2, 200) if all(p % d for d in range(2, p))]
    assert [n for n in range(200) if is_probable_prime(n)] == primes
    assert is_probable_prime(2**61 - 1) and is_probable_prime(2**31 - 1)
    assert not is_probable_prime(561) and not is_probable_prime(2**32 + 1)


def test_query_validation():
    with pytest.raises(ValueError):
        CoeffQuery((-1,), 7)
    with pytest.raises(ValueError):
        CoeffQuery((1,), 1)
    with pytest.warns(CompositeModulusWarning):
        CoeffQuery((1,), 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        CoeffQuery((1,), 10007)


def test_coeff_examples(example1, catalan):
    assert coeff_alg(catalan, CoeffQuery((10,), 10007)) == 6789
    for p in PRIMES:
        assert coeff_alg(example1, CoeffQuery((7,), p)) == 0
        assert coeff_alg(example1, CoeffQuery((1,), p)) == 1
        assert coeff_alg(catalan, CoeffQuery((0,), p)) == 0
    with pytest.raises(ValueError):
        coeff_alg(catalan, CoeffQuery((1, 1), 7))


def test_engine_agreement(catalan, example1):
    rng = random.Random(32)
    systems = [catalan, example1]
    while len(systems) < 6:
        s = random_proper_system(rng, k=1 + len(systems) % 2, ell=rng.randint(1, 3), d=rng.randint(2, 3))
        if not solution_series(s, 6, "kleene").is_zero():
            systems.append(s)
    for s in systems:
        for p in PRIMES:
            K = solution_series(s, 32, "kleene", p=p)
            H = solution_series(s, 32, "hensel", p=p)
            assert K == H
            for v in list(exponent_vectors(s.k, 32))[::17]:
                assert coeff_alg(s, CoeffQuery(v, p), "hensel") == coeff_alg(s, CoeffQuery(v, p), "kleene")


def test_engine_names(catalan):
    assert resolve_engine(catalan, "auto") == "hensel"
    with pytest.raises(ValueError):
        resolve_engine(catalan, "newton")


def test_catalan_annihilating_polynomial(catalan):
    # C = 1 + A satisfies 1 - C + x C^2 = 0, and ord A = 1 respects d^(l^2)
    N = 20
    (A,) = kleene_solve(catalan, N)
    C = TruncatedSeries.const(1, ("x",), N) + A
    x = TruncatedSeries.var("x", ("x",), N)
    lhs = TruncatedSeries.const(1, ("x",), N) - C + series_trunc_mul(x, series_trunc_mul(C, C, N), N)
    assert lhs.is_zero()
    assert ord_(A).value <= BoundConfig.formula().resolve(catalan)


# -- zeroness ----------------------------------------------------------------

def test_eq_alg_examples(example1, catalan, data_dir):
    v = eq_alg(example1, BoundConfig.explicit(4))
    assert not v.zero and v.witness == (1,) and v.coefficient == 1 and not v.conditional
    z = eq_alg(difference_system(catalan, catalan), BoundConfig.explicit(16))
    assert z.zero
    g = parse_grammar((data_dir / "balanced.cfg").read_text())
    diff = difference_system(census_system(g, "X"), census_system(g, "Y"))
    v = eq_alg(diff, BoundConfig.explicit(4))
    assert not v.zero and sum(v.witness) == 2


def test_difference_system_is_proper(catalan, example1):
    d = difference_system(catalan, catalan)
    assert validate_proper(d).ok
    assert d.variables[0] == "d"
    assert len(set(d.variables)) == d.ell == 3
    with pytest.raises(ValueError):
        difference_system(catalan, parse_system("vars: y\nindets: t\ny = t\n"))


def test_formula_bound_is_conditional(example1):
    b = BoundConfig.formula(1)
    assert b.resolve(example1) == 2 and b.heuristic
    v = eq_alg(example1, b)
    assert v.conditional and not v.zero
    with pytest.raises(ValueError):
        BoundConfig.explicit(0)


def test_bound_too_large():
    s = random_proper_system(random.Random(1), k=3, ell=1)
    with pytest.raises(BoundTooLarge) as info:
        eq_alg(s, BoundConfig.explicit(10**4))
    assert info.value.feasible < 10**4


def test_reduction_probe(example1, catalan):
    red = eq_alg_reduction_circuit(example1, BoundConfig.explicit(4))
    pr = probe_reduction(red, seed=7)
    assert red.threshold == red.Dprime - 4
    assert pr.degree >= red.threshold and not pr.at_most_threshold
    assert pr.failure_bound <= pr.degree / pr.prime
    zero = eq_alg_reduction_circuit(difference_system(catalan, catalan), BoundConfig.explicit(4))
    pz = probe_reduction(zero, seed=7)
    assert pz.at_most_threshold and pz.degree <= zero.threshold - 1


def test_probe_agrees_with_eq_alg():
    rng = random.Random(21)
    for _ in range(4):
        s = random_proper_system(rng, k=1, ell=rng.randint(1, 2), d=2)
        for D in (2, 3):
            b = BoundConfig.explicit(D)
            for system in (s, difference_system(s, s)):
                want = eq_alg(system, b).zero
                assert probe_reduction(eq_alg_reduction_circuit(system, b), seed=D).at_most_threshold == want


# -- finiteness ------------------------------------------------------------------

def test_fin_alg_examples(example1, catalan):
    v = fin_alg(example1, BoundConfig.explicit(4))
    assert v.finite and v.degree == 1 and v.window == (5, 20)
    v = fin_alg(catalan, BoundConfig.explicit(2))
    assert not v.finite and v.witness == (3,) and v.coefficient == 5
    z = fin_alg(difference_system(catalan, catalan), BoundConfig.explicit(3))
    assert z.finite and z.degree == 0


def test_zero_implies_finite():
    rng = random.Random(4)
    for _ in range(3):
        s = random_proper_system(rng, k=1, ell=2, d=2)
        d = difference_system(s, s)
        assert eq_alg(d, BoundConfig.explicit(3)).zero
        f = fin_alg(d, BoundConfig.explicit(3))
        assert f.finite and f.degree == 0


def test_finite_polynomial_solution():
    s = parse_system("vars: y z\nindets: x\ny = x*z + x\nz = x^2\n")
    v = fin_alg(s, BoundConfig.explicit(3))
    assert v.finite and v.degree == 3


# -- circuits as systems -----------------------------------------------------------

def coefficient_through_system(c, v, p, engine="kleene"):
    s, alpha = slp_to_system(c)
    return coeff_alg(s, CoeffQuery(tuple(v) + (alpha,), p), engine)


def test_slp_examples():
    s, alpha = slp_to_system(input_circuit("x"))
    assert alpha == 1 and validate_proper(s).ok
    assert kleene_solve(s, 4)[0].body.to_str() == "x*t"
    s, alpha = slp_to_system(const_circuit(0, ("x",)))
    assert kleene_solve(s, 4)[0].is_zero()
    geo = geometric_sum_circuit(input_circuit("x"), 4)
    for engine in ("kleene", "hensel"):
        for d in range(5):
            assert coefficient_through_system(geo, (d,), 10007, engine) == 1


def test_slp_systems_are_proper_and_shifted():
    rng = random.Random(12)
    for _ in range(10):
        c = random_circuit(rng, size=rng.randint(3, 12))
        s, alpha = slp_to_system(c)
        assert validate_proper(s).ok
        f = eval_series(c, n=40).body
        D = max(1, f.total_degree())
        (A,) = kleene_solve(s, alpha + D)[:1]
        # every surviving monomial carries exactly t^alpha
        assert all(e[-1] == alpha for e, _ in A.body.items())
        assert {e[:-1]: c_ for e, c_ in A.body.items()} == dict(f.items())


def test_slp_name_clash():
    b = CircuitBuilder(("t", "x"))
    c = b.build(b.mul(b.input("t"), b.input("x")))
    s, alpha = slp_to_system(c)
    assert s.indets[:2] == ("t", "x") and s.indets[2] != "t"
