import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from mol import germs as G
from mol.expr import MPoly
from mol.freegroup import Alphabet, parse

z = sp.Symbol("z")


def to_sympy(g):
    return z + sum(sp.Rational(c.numerator, c.denominator) * z**i for i, c in g.coeffs.items())


def sympy_compose(f, g, order):
    return sp.series(f.subs(z, g), z, 0, order + 1).removeO()


def from_sympy(expr, order):
    poly = sp.Poly(sp.expand(expr), z)
    return G.Germ({k: Fraction(int(c.p), int(c.q)) for (k,), c in poly.terms() if 2 <= k <= order}, order, None)


coeff = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def germs(order=7):
    return st.dictionaries(st.integers(2, order), coeff, max_size=4).map(lambda d: G.Germ(d, order, None))


@settings(max_examples=40, deadline=None)
@given(germs(), germs())
def test_composition_matches_sympy(f, g):
    expected = from_sympy(sympy_compose(to_sympy(f), to_sympy(g), 7), 7)
    assert f.compose(g) == expected


@settings(max_examples=40, deadline=None)
@given(germs())
def test_inverse_is_two_sided(f):
    e = G.Germ.identity(7, None)
    assert f.compose(f.inverse()) == e
    assert f.inverse().compose(f) == e


@settings(max_examples=25, deadline=None)
@given(germs(6), germs(6), germs(6))
def test_composition_associative(f, g, h):
    assert f.compose(g).compose(h) == f.compose(g.compose(h))


def test_frozen_values():
    f = G.Germ.parse("z + z^2", 6, None)
    assert str(f.compose(f)) == "z + 2*z^2 + 2*z^3 + z^4"
    assert str(f.inverse()) == "z - z^2 + 2*z^3 - 5*z^4 + 14*z^5 - 42*z^6"
    g = G.Germ.parse("z + z^3", 6, None)
    assert str(G.commutator(f, g)) == "z - z^4 + z^5 + 5*z^6"


def test_parse_validation():
    with pytest.raises(G.GermError):
        G.Germ.parse("1 + z")
    with pytest.raises(G.GermError):
        G.Germ.parse("2*z + z^2")
    with pytest.raises(G.GermError):
        G.Germ({1: 3})
    with pytest.raises(G.GermError):
        G.Germ.parse("z", order=1)


def test_string_round_trip_with_parameters():
    g = G.Germ.parse("z + eps*u*z^2 - 1/2*eps^2*z^3 + (eps + eps^2*u)*z^4", 6, 3)
    assert G.Germ.parse(str(g), 6, 3) == g


def test_eps_truncation():
    g = G.Germ.parse("z + eps^5*z^2 + eps*z^3", 6, 4)
    assert g.level() == 2


def test_mismatched_truncations_rejected():
    with pytest.raises(G.GermError):
        G.Germ.parse("z + z^2", 6).compose(G.Germ.parse("z + z^2", 7))


def test_levels():
    assert G.level(G.Germ.parse("z + 3*z^4", 6)) == 3
    assert G.level(G.Germ.identity(6)) is G.Level.IDENTITY


@pytest.mark.parametrize("p,q", [(1, 2), (2, 1), (1, 3), (2, 3), (3, 5)])
def test_commutator_level_formula(p, q):
    rng = random.Random(p * 10 + q)
    N = 2 * (p + q) + 2
    for _ in range(10):
        f = G.Germ({p + 1: rng.randint(1, 4), p + 2: rng.randint(-3, 3)}, N, None)
        g = G.Germ({q + 1: -rng.randint(1, 4), q + 3: rng.randint(-3, 3)}, N, None)
        chk = G.commutator_level_check(f, g)
        assert chk.holds
        assert chk.commutator_level == p + q
        assert chk.computed == f[p + 1] * g[q + 1] * (p - q)


def test_same_level_commutator_starts_at_degree_2p_plus_2():
    f = G.Germ.parse("z + z^2", 8, None)
    g = G.Germ.parse("z + z^2 + z^3", 8, None)
    h = G.commutator(f, g)
    assert h.level() + 1 == 4  # degree 2p+2, so level 2p+1
    assert G.commutator(f, f).is_identity()


def test_level_check_requires_enough_order():
    with pytest.raises(G.TruncationTooSmall):
        G.commutator_level_check(G.Germ.parse("z + z^3", 4), G.Germ.parse("z + z^4", 4))


def test_dichotomy_nonabelian_chain():
    gens = [G.Germ.parse("z + z^2", 10, None), G.Germ.parse("z + z^3", 10, None)]
    w = G.group_dichotomy(gens, 3)
    assert isinstance(w, G.NonAbelianWitness)
    assert w.levels == [3, 4, 5]
    assert all(not h.is_identity() for h in w.chain)


def test_dichotomy_abelian():
    f = G.Germ.parse("z + z^2", 8, None)
    assert isinstance(G.group_dichotomy([f], 3), G.Abelian)
    # powers of one germ commute
    out = G.group_dichotomy([f, f.compose(f)], 3)
    assert isinstance(out, G.Abelian) and out.common_level == 1


def test_dichotomy_truncation_exhausted():
    gens = [G.Germ.parse("z + z^2", 5, None), G.Germ.parse("z + z^3", 5, None)]
    with pytest.raises(G.TruncationExhausted):
        G.group_dichotomy(gens, 3)


def test_poincare_rep_of_commutator():
    asgn = G.wronskian_assignment()
    h = G.poincare_rep(asgn, parse("[d1,d2]", Alphabet(["d1", "d2"])))
    level, c = h.leading()
    assert level + 1 == 4
    assert c == -MPoly.var("eps", 2) * MPoly.var("u_d1") * MPoly.var("u_d2")


def test_poincare_rep_is_a_homomorphism():
    asgn = G.wronskian_assignment(order=8)
    alpha = Alphabet(["d1", "d2"])
    u, v = parse("d1 d2^-1", alpha), parse("d2 d1 d1", alpha)
    assert G.poincare_rep(asgn, u * v) == G.poincare_rep(asgn, u).compose(G.poincare_rep(asgn, v))
    assert G.poincare_rep(asgn, alpha.identity()).is_identity()


def test_assignment_errors(tmp_path):
    asgn = G.wronskian_assignment()
    with pytest.raises(G.UnassignedGenerator):
        G.poincare_rep(asgn, parse("d3", Alphabet(["d3"])))
    with pytest.raises(G.GermError):
        G.GermAssignment.from_json({"germs": {}})
    p = tmp_path / "g.json"
    p.write_text('{"order": 6, "germs": {"a": "z + z^2"}}')
    assert G.GermAssignment.load(p)["a"].order == 6
