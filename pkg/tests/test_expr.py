from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mol.expr import ExpressionError, MPoly, evaluate, parse_poly


def test_evaluate_with_fractions():
    leaf = lambda kind, v: Fraction(v) if kind == "int" else Fraction(2)  # noqa: E731
    assert evaluate("1/2 + a^2 - (3 - a)", leaf) == Fraction(7, 2)
    assert evaluate("-a^-1", leaf) == Fraction(-1, 2)


@pytest.mark.parametrize("bad", ["", "1 +", "(a", "a b", "a ^ b", "1/0", "a $"])
def test_errors(bad):
    with pytest.raises(ExpressionError):
        parse_poly(bad)


def test_poly_operations():
    p = parse_poly("(u + eps)^2")
    assert p.degree_in("eps") == 2
    assert p.coefficient_of("eps", 1) == MPoly.var("u") * 2
    assert p.truncate("eps", 1) == parse_poly("u^2 + 2*u*eps")
    assert str(parse_poly("1/2*u - eps^2")) == "1/2*u - eps^2"
    with pytest.raises(ExpressionError):
        parse_poly("1/u")
    with pytest.raises(ExpressionError):
        parse_poly("x", allowed={"z"})


terms = st.dictionaries(st.sampled_from(["a", "b", "c"]), st.integers(0, 2), max_size=2).map(
    lambda d: tuple(sorted((k, v) for k, v in d.items() if v)))
polys = st.dictionaries(terms, st.integers(-4, 4), max_size=4).map(MPoly)


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p - p == MPoly()


@given(polys)
def test_str_round_trip(p):
    assert parse_poly(str(p)) == p
