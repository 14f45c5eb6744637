from math import comb

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from mol import gv as V

x, F, eps = V.x, V.F, V.eps


@pytest.mark.parametrize(
    "phi, length, kind",
    [
        ("0", 1, "closed"),
        ("x/(x^2-1)", 1, "closed"),
        ("F/(x-1)", 2, "Liouvillian"),
        ("1/(x-1) + F/(x+1)", 2, "Liouvillian"),
        ("F/(x-1) + F^2/(x+1)", 3, "Riccati"),
        ("F^3/(x-1) + F/(x+1)", 4, "length-4"),
        ("F^8/(x-1) - 3*F^2/(x+1)", 9, "length-9"),
    ],
)
def test_constructed_lengths(phi, length, kind):
    seq = V.gv_sequence(V.parse_phi(phi))
    assert seq.length == length
    assert seq.classification == kind
    assert V.verify_gv(seq).ok
    assert V.gv_length(V.parse_phi(phi)).length == length


def sympy_residual(phi_expr, n, top):
    """Recursion residual computed from scratch with sympy expressions.

    One-forms are pairs (A, B) for A dx + B dF; two-forms the coefficient of
    dF ^ dx.
    """
    forms = [(eps * phi_expr, sp.Integer(1))]
    for k in range(1, top + 1):
        forms.append((eps * sp.diff(phi_expr, F, k), sp.Integer(0)))

    def eta(k):
        return forms[k] if k < len(forms) else (0, 0)

    def d(w):
        return sp.diff(w[0], F) - sp.diff(w[1], x)

    def wedge(a, b):
        return a[1] * b[0] - a[0] * b[1]

    rhs = wedge(eta(0), eta(n + 1)) + sum(comb(n, k) * wedge(eta(k), eta(n - k + 1)) for k in range(1, n + 1))
    return sp.simplify(d(eta(n)) - rhs)


@pytest.mark.parametrize("phi", ["F/(x-1) + F^2/(x+1)", "(F^3 + 2*F)/(x-1) + (1 - F^2)/(x+1)"])
def test_residuals_match_independent_sympy_oracle(phi):
    expr = sp.sympify(phi.replace("^", "**"), locals={"x": x, "F": F})
    seq = V.gv_sequence(V.parse_phi(phi))
    for n in range(seq.max_index):
        assert sympy_residual(expr, n, seq.max_index + 1) == 0
        assert V.gv_residual(seq, n).is_zero()


def test_residuals_fail_for_a_wrong_sequence():
    seq = V.gv_sequence(V.parse_phi("F^2/(x-1)"))
    seq.forms[1] = seq.forms[1].scale(2)
    assert not V.verify_gv(seq).ok
    assert V.verify_gv(seq).nonzero()


polys = st.lists(st.integers(-3, 3), min_size=1, max_size=4)


def phi_from(p1, p2):
    def poly(cs):
        return " + ".join(f"({c})*F^{i}" for i, c in enumerate(cs)) or "0"

    return f"({poly(p1)})/(x-1) + ({poly(p2)})/(x+1)"


@settings(max_examples=25, deadline=None)
@given(polys, polys)
def test_length_is_degree_plus_one(p1, p2):
    phi = V.parse_phi(phi_from(p1, p2))
    seq = V.gv_sequence(phi)
    assert seq.length == max(phi.deg_F(), 0) + 1
    assert V.verify_gv(seq).ok


@settings(max_examples=25, deadline=None)
@given(polys, polys)
def test_exterior_derivative_squares_to_zero(p1, p2):
    f = V.parse_phi(phi_from(p1, p2)) * V.parse_phi("x + F")
    assert V.exterior_d(V.d_function(f)).is_zero()


@settings(max_examples=25, deadline=None)
@given(polys, polys, polys, polys)
def test_wedge_antisymmetric(a1, b1, a2, b2):
    u = V.OneForm(V.parse_phi(phi_from(a1, b1)), V.parse_phi(phi_from(b1, a1)))
    w = V.OneForm(V.parse_phi(phi_from(a2, b2)), V.parse_phi(phi_from(b2, a2)))
    assert (V.wedge(u, w) + V.wedge(w, u)).is_zero()
    assert V.wedge(u, u).is_zero()


def test_derivative_ladder_and_dx_multiples():
    seq = V.gv_sequence(V.parse_phi("F^4/(x-1) + F/(x+1)"))
    for k in range(1, seq.length - 1):
        # eps is constant in F, so eps * d/dF (A_k / eps) = d/dF A_k
        assert seq.forms[k + 1].A == seq.forms[k].A.diff_F()
    assert all(w.is_dx_multiple() for w in seq.forms[1:])
    assert V.verify_gv(seq).pairwise_wedges_zero


def test_depends_only_on_phi():
    a = V.gv_sequence(V.parse_phi("F/(x-1) + F/(x+1)"))
    b = V.gv_sequence(V.parse_phi("2*F*x/(x^2-1)"))
    assert a.to_json() == b.to_json()


def test_rational_arithmetic_normal_form():
    r = V.parse_phi("(x^2-1)/(x-1)")
    assert r == V.parse_phi("x+1")
    assert str(V.parse_phi("F/(x-1) + F/(x+1)")) == "2*F*x/(x^2 - 1)"


@pytest.mark.parametrize("bad", ["1/F", "x/(F+1)", "y", "F^", "1/(x-x)", "1/eps"])
def test_phi_errors(bad):
    with pytest.raises(V.PhiError.__mro__[1]):
        V.parse_phi(bad)


def test_max_index_too_small():
    with pytest.raises(V.GVError):
        V.gv_sequence(V.parse_phi("F^3/(x-1)"), max_index=3)


def test_riccati_system():
    sysd = V.riccati_system(V.parse_phi("F/(x-1) + F^2/(x+1)"))
    assert sysd["unknowns"] == ["H", "G1", "G2"]
    assert len(sysd["equations"]) == 3
    for bad in ["F/(x-1)", "F^3/(x-1)"]:
        with pytest.raises(V.GVError):
            V.riccati_system(V.parse_phi(bad))


@pytest.mark.parametrize("case", V.FIRST_INTEGRAL_CASES)
def test_liouvillian_first_integrals(case):
    rec = V.verify_first_integral(case)
    assert rec.ok
    assert rec.to_json()["ok"]


def test_first_integral_rejects_unknown_case():
    with pytest.raises(ValueError):
        V.verify_first_integral("Riccati")


def test_extension_detects_a_wrong_integral():
    u = sp.Symbol("u")
    ext = V.DifferentialExtension({u: (eps * u / (x - 1), 0)})
    A, B = ext.d(u * F**2)
    seq = V.gv_sequence(V.parse_phi("F/(x-1)"))
    a0, b0 = seq.forms[0].A.as_expr(), seq.forms[0].B.as_expr()
    assert not (ext.is_zero(A - u * a0) and ext.is_zero(B - u * b0))
