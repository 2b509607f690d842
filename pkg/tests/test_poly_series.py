import pytest
import sympy
from hypothesis import given, settings, strategies as st

from algseries.poly import AmbientMismatch, ParseError, Polynomial, parse_polynomial, reduce_mod_p
from algseries.series import (NotAUnit, PrecisionError, SeriesRing, TruncatedSeries, compose_univariate,
                              ord_, series_invert_unit, series_trunc_mul, tail)

X = ("x",)
XYZ = ("x1", "x2", "x3")


def P(text, amb=X):
    return parse_polynomial(text, amb)


def S(text, n, amb=X):
    return TruncatedSeries(P(text, amb), n)


def to_sympy(f: Polynomial):
    syms = sympy.symbols(f.ambient)
    return sum((c * sympy.prod([s**k for s, k in zip(syms, e)]) for e, c in f.items()), sympy.Integer(0))


# -- polynomials -------------------------------------------------------------

def test_binomial_square():
    assert P("(x+1)*(x+1)") == P("x^2 + 2*x + 1")
    assert P("(x+1)^2 - x^2") == P("2*x + 1")
    assert P("(x+1)*(x-3)") * 0 == Polynomial.zero(X)


def test_canonical_text():
    f = P("3 - x1*x2 + x2^2*x3 + x1", XYZ)
    assert f.to_str() == "x2^2*x3 - x1*x2 + x1 + 3"
    assert P(f.to_str(), XYZ) == f
    assert str(Polynomial.zero(XYZ)) == "0"


def test_parse_errors():
    with pytest.raises(ParseError):
        P("x +")
    with pytest.raises(ParseError):
        P("y + 1")
    with pytest.raises(ParseError):
        P("x^(1/2)")
    with pytest.raises(ParseError):
        P("x / 2")


def test_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        P("x") + P("y", ("y",))


def test_derivative_and_evaluate():
    f = P("x1^3*x2 - 2*x1*x2 + 7", XYZ)
    assert f.derivative("x1") == P("3*x1^2*x2 - 2*x2", XYZ)
    assert f.evaluate({"x1": 2, "x2": 5, "x3": 0}) == 40 - 20 + 7
    assert f.evaluate({"x1": 2, "x2": 5, "x3": 0}, modulus=7) == 27 % 7


def test_reduce_mod_p():
    assert reduce_mod_p(P("14*x^4"), 5) == P("4*x^4")
    assert reduce_mod_p(P("7*x"), 7).is_zero()
    assert reduce_mod_p(P("16796*x^10"), 7).coeff((10,)) == 16796 % 7 == 3


small_polys = st.dictionaries(
    st.tuples(*[st.integers(0, 3)] * 3), st.integers(-5, 5), max_size=5
).map(lambda d: Polynomial(XYZ, d))


@settings(max_examples=60, deadline=None)
@given(small_polys, small_polys, small_polys)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == Polynomial.zero(XYZ)


@settings(max_examples=40, deadline=None)
@given(small_polys, small_polys)
def test_product_matches_sympy(a, b):
    assert sympy.expand(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0


@settings(max_examples=40, deadline=None)
@given(small_polys)
def test_serialization_is_canonical(a):
    again = P(a.to_str(), XYZ)
    assert again == a and again.to_str() == a.to_str()


# -- truncated series ------------------------------------------------------------

def test_trunc_mul_examples():
    geo = S("1 + x + x^2 + x^3 + x^4 + x^5", 5)
    assert series_trunc_mul(S("1 - x", 5), geo, 5) == S("1", 5)
    cat = S("x + 2*x^2 + 5*x^3 + 14*x^4", 4)
    assert series_trunc_mul(cat, cat, 4) == S("x^2 + 4*x^3 + 14*x^4", 4)
    assert series_trunc_mul(cat, S("0", 4), 4).is_zero()
    with pytest.raises(PrecisionError):
        series_trunc_mul(cat, cat, 5)


def test_invert_unit_examples():
    assert series_invert_unit(S("1 - x", 3), 3) == S("1 + x + x^2 + x^3", 3)
    assert series_invert_unit(S("2*x + 1", 2), 2) == S("1 - 2*x + 4*x^2", 2)
    assert series_invert_unit(S("-1", 5), 5) == S("-1", 5)
    with pytest.raises(NotAUnit):
        series_invert_unit(S("2 + x", 3), 3)
    with pytest.raises(NotAUnit):
        series_invert_unit(S("x", 3), 3)


def test_order_examples():
    assert ord_(S("x2 + x3^2", 4, XYZ)).value == 1
    v = ord_(S("0", 8))
    assert v.at_least and v.value == 9 and str(v) == ">= 9"
    # first Newton iterate of y = x + x^2 - 2xy + y^2 minus its solution x
    a1 = series_trunc_mul(S("-x^2", 6), series_invert_unit(S("2*x + 1", 6), 6), 6)
    assert ord_(a1).value == 2


def test_tail_examples():
    assert tail(S("x + x^3", 4), 1) == S("x^3", 4)
    cat = S("x + 2*x^2 + 5*x^3 + 14*x^4", 4)
    assert tail(cat, 1) == S("2*x^2 + 5*x^3 + 14*x^4", 4)
    assert tail(cat, 2) + (cat - tail(cat, 2)) == cat
    with pytest.raises(PrecisionError):
        tail(cat, 5)


def test_ring_kernel_matches_sympy_series():
    ring = SeriesRing(2, 6)
    a = ring.from_terms({(1, 0): 3, (0, 2): -1, (2, 1): 4})
    b = ring.from_terms({(0, 0): 1, (1, 1): 2, (3, 0): -5})
    got = ring.to_terms(ring.mul(a, b))
    x, y = sympy.symbols("x y")
    prod = sympy.Poly(sympy.expand((3*x - y**2 + 4*x**2*y) * (1 + 2*x*y - 5*x**3)), x, y)
    want = {m: int(c) for m, c in prod.terms() if sum(m) <= 6}
    assert got == want


def test_ring_mod_p():
    ring = SeriesRing(1, 4, 7)
    a = ring.from_terms({(1,): 5, (2,): 3})
    assert ring.to_terms(ring.mul(a, a)) == {(2,): 25 % 7, (3,): 30 % 7, (4,): 9 % 7}


# -- properties --------------------------------------------------------------

N = 8


def quasi(d):
    return TruncatedSeries(Polynomial(("x1", "x2"), {e: c for e, c in d.items() if 0 < sum(e) <= N}), N)


series_st = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                            st.integers(-4, 4), max_size=5).map(quasi)


@settings(max_examples=80, deadline=None)
@given(series_st, series_st)
def test_valuation_laws(f, g):
    of, og = ord_(f), ord_(g)
    s = f + g
    if not s.is_zero():
        assert ord_(s).value >= min(of.value, og.value)
    if of.value + og.value <= N and not f.is_zero() and not g.is_zero():
        fg = series_trunc_mul(f, g, N)
        assert ord_(fg).value == of.value + og.value


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=5), series_st, series_st)
def test_polynomial_difference_order(coeffs, a, b):
    d = ord_(a - b)
    if d.at_least:
        return
    diff = compose_univariate(coeffs, a) - compose_univariate(coeffs, b)
    assert ord_(diff).value >= d.value


@settings(max_examples=60, deadline=None)
@given(series_st, st.sampled_from([1, -1]), st.integers(0, N))
def test_invert_round_trip(f, c, n):
    u = TruncatedSeries.const(c, f.indets, N) + f
    inv = series_invert_unit(u, n)
    one = TruncatedSeries.const(1, f.indets, n)
    assert series_trunc_mul(TruncatedSeries(u.body, n), inv, n) == one
