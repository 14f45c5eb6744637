"""One-forms in coordinates (x, F) and Godbillon-Vey sequences.

For the deformation ``eta0 = dF + eps*phi dx`` with ``phi`` rational in x and
polynomial in F, ``eta_k = eps * (d/dF)^k phi dx`` (k >= 1) satisfies

    d eta_n = eta_0 ^ eta_{n+1} + sum_{k=1}^{n} C(n, k) eta_k ^ eta_{n-k+1}

and terminates after ``deg_F(phi) + 1`` steps.  Everything here is an
identity check in a canonical normal form, never a numerical test.

Two-forms are stored as the coefficient S of ``dF ^ dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import sympy as sp

from .expr import ExpressionError, evaluate

x, F, eps = sp.symbols("x F eps")
GENS = (x, F, eps)


class PhiError(ExpressionError):
    pass


def _poly(e) -> sp.Poly:
    return sp.Poly(e, *GENS, domain="QQ")


class RatF:
    """Element of Q(x)[F, eps] with an x-only denominator, kept canonical:
    numerator and denominator coprime, denominator monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = num if isinstance(num, sp.Poly) else _poly(num)
        den = den if isinstance(den, sp.Poly) else _poly(den)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if den.degree(F) > 0 or den.degree(eps) > 0:
            raise PhiError("denominator may only depend on x")
        if num.is_zero:
            self.num, self.den = num, _poly(1)
            return
        g = sp.gcd(num, den)
        if g.total_degree() > 0:
            num = num.exquo(g)
            den = den.exquo(g)
        lc = den.LC()
        if lc != 1:
            num = num.quo_ground(lc)
            den = den.quo_ground(lc)
        self.num, self.den = num, den

    @classmethod
    def const(cls, c) -> "RatF":
        return cls(_poly(c))

    @staticmethod
    def lift(v):
        if isinstance(v, RatF):
            return v
        if isinstance(v, int):
            return RatF.const(v)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = RatF.lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num.as_expr(), self.den.as_expr()))

    def __add__(self, other):
        other = RatF.lift(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return RatF(self.num + other.num, self.den)
        g = sp.gcd(self.den, other.den)
        a = other.den.exquo(g)
        b = self.den.exquo(g)
        return RatF(self.num * a + other.num * b, self.den * a)

    __radd__ = __add__

    def __neg__(self):
        out = RatF.__new__(RatF)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other):
        other = RatF.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = RatF.lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RatF.const(0)
        return RatF(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatF.lift(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        if other.num.degree(F) > 0 or other.num.degree(eps) > 0:
            raise PhiError("division by an expression depending on F or eps")
        return RatF(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatF.lift(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RatF.const(1) / (self ** -n)
        return RatF(self.num ** n, self.den ** n)

    def diff_x(self) -> "RatF":
        return RatF(self.num.diff(x) * self.den - self.num * self.den.diff(x), self.den ** 2)

    def diff_F(self) -> "RatF":
        return RatF(self.num.diff(F), self.den)

    def deg_F(self) -> int:
        """Degree in F (-1 for zero)."""
        return -1 if self.is_zero() else self.num.degree(F)

    def as_expr(self):
        return self.num.as_expr() / self.den.as_expr()

    def __str__(self):
        return str(self.as_expr()).replace("**", "^")

    def __repr__(self):
        return f"RatF({self})"


def parse_phi(text: str) -> RatF:
    """Parse a deformation function in x and F (F may not appear in a denominator)."""

    def leaf(kind, value):
        if kind == "int":
            return RatF.const(value)
        if value == "x":
            return RatF(_poly(x))
        if value == "F":
            return RatF(_poly(F))
        raise PhiError(f"unknown variable {value!r} (use x and F)", text)

    try:
        out = evaluate(text, leaf)
    except PhiError as exc:
        raise PhiError(f"{exc.args[0]} in {text!r}") from None
    return RatF.lift(out)


@dataclass(frozen=True)
class OneForm:
    """A dx + B dF."""

    A: RatF
    B: RatF

    @classmethod
    def zero(cls) -> "OneForm":
        return cls(RatF.const(0), RatF.const(0))

    @classmethod
    def dx(cls, coeff: RatF) -> "OneForm":
        return cls(coeff, RatF.const(0))

    def is_zero(self) -> bool:
        return self.A.is_zero() and self.B.is_zero()

    def is_dx_multiple(self) -> bool:
        return self.B.is_zero()

    def __add__(self, other):
        return OneForm(self.A + other.A, self.B + other.B)

    def scale(self, c) -> "OneForm":
        c = RatF.lift(c)
        return OneForm(self.A * c, self.B * c)

    def __str__(self):
        parts = []
        if not self.B.is_zero():
            parts.append("dF" if self.B == 1 else f"({self.B})*dF")
        if not self.A.is_zero():
            parts.append(f"({self.A})*dx")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class TwoForm:
    """S dF ^ dx."""

    S: RatF

    def is_zero(self) -> bool:
        return self.S.is_zero()

    def __add__(self, other):
        return TwoForm(self.S + other.S)

    def __sub__(self, other):
        return TwoForm(self.S - other.S)

    def scale(self, c) -> "TwoForm":
        return TwoForm(self.S * RatF.lift(c))

    def __str__(self):
        return "0" if self.is_zero() else f"({self.S})*dF^dx"


def exterior_d(w: OneForm) -> TwoForm:
    # d(A dx + B dF) = (A_F - B_x) dF ^ dx
    return TwoForm(w.A.diff_F() - w.B.diff_x())


def d_function(f: RatF) -> OneForm:
    return OneForm(f.diff_x(), f.diff_F())


def wedge(a: OneForm, b: OneForm) -> TwoForm:
    # (A1 dx + B1 dF) ^ (A2 dx + B2 dF) = (B1 A2 - A1 B2) dF ^ dx
    return TwoForm(a.B * b.A - a.A * b.B)


EPS = RatF(_poly(eps))


def eta0(phi: RatF) -> OneForm:
    return OneForm(EPS * phi, RatF.const(1))


@dataclass
class GVSequence:
    """eta_0 .. eta_L with eta_L = 0 (L is the length); ``max_index`` bounds
    the verified equations (n = 0 .. max_index - 1)."""

    phi: RatF
    forms: list[OneForm]
    max_index: int
    residuals: list[TwoForm] = field(default_factory=list)

    def eta(self, k: int) -> OneForm:
        return self.forms[k] if k < len(self.forms) else OneForm.zero()

    @property
    def length(self) -> int:
        nonzero = [k for k, w in enumerate(self.forms) if not w.is_zero()]
        return (max(nonzero) + 1) if nonzero else 0

    @property
    def classification(self) -> str:
        return classify(self.length)

    def to_json(self) -> dict:
        report = verify_gv(self)
        return {
            "phi": str(self.phi),
            "deg_F": self.phi.deg_F(),
            "forms": [{"k": k, "eta": str(w)} for k, w in enumerate(self.forms)],
            "length": self.length,
            "classification": self.classification,
            "residuals": [{"n": n, "residual": str(r)} for n, r in enumerate(report.residuals)],
            "all_residuals_zero": report.ok,
            "pairwise_wedges_zero": report.pairwise_wedges_zero,
        }


def classify(length: int) -> str:
    return {1: "closed", 2: "Liouvillian", 3: "Riccati"}.get(length, f"length-{length}")


class GVError(ValueError):
    pass


def gv_sequence(phi: RatF, max_index: int | None = None) -> GVSequence:
    """eta_0 = dF + eps*phi dx and eta_k = eps * d^k phi/dF^k dx."""
    deg = max(phi.deg_F(), 0)
    if max_index is None:
        max_index = deg + 2
    if max_index < deg + 2:
        raise GVError(f"max index {max_index} too small for deg_F phi = {deg} (need >= {deg + 2})")
    forms = [eta0(phi)]
    d = phi
    for _ in range(deg + 1):
        d = d.diff_F()
        forms.append(OneForm.dx(EPS * d))
    seq = GVSequence(phi, forms, max_index)
    seq.residuals = verify_gv(seq).residuals
    return seq


def gv_residual(seq: GVSequence, n: int) -> TwoForm:
    rhs = wedge(seq.eta(0), seq.eta(n + 1))
    for k in range(1, n + 1):
        a, b = seq.eta(k), seq.eta(n - k + 1)
        if a.is_zero() or b.is_zero():
            continue
        rhs = rhs + wedge(a, b).scale(comb(n, k))
    return exterior_d(seq.eta(n)) - rhs


@dataclass
class GVReport:
    residuals: list[TwoForm]
    pairwise_wedges_zero: bool | None

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals) and self.pairwise_wedges_zero is not False

    def nonzero(self) -> list[int]:
        return [n for n, r in enumerate(self.residuals) if not r.is_zero()]


def verify_gv(seq: GVSequence) -> GVReport:
    residuals = [gv_residual(seq, n) for n in range(seq.max_index)]
    tail = seq.forms[1:]
    wedges = None
    if all(w.is_dx_multiple() for w in tail):
        wedges = all(wedge(a, b).is_zero() for a in tail for b in tail)
    return GVReport(residuals, wedges)


@dataclass
class LengthResult:
    length: int
    note: str = ""


def gv_length(phi: RatF) -> LengthResult:
    """Length of the constructed sequence (not a minimality claim)."""
    if phi.is_zero():
        return LengthResult(1, "phi = 0: eta0 = dF is closed")
    return LengthResult(phi.deg_F() + 1)


def riccati_system(phi: RatF) -> dict:
    """The three-equation first-integral system for deg_F phi = 2 (emitted, not solved)."""
    if phi.deg_F() != 2:
        raise GVError(f"Riccati system needs deg_F phi = 2, got {phi.deg_F()}")
    seq = gv_sequence(phi)
    e0, e1, e2 = (str(seq.forms[k]) for k in range(3))
    return {
        "unknowns": ["H", "G1", "G2"],
        "equations": [
            "dH = G1*eta0",
            "dG1 = G1*(eta1 + (2/G2)*eta0)",
            "dG2 = (G2^2/2)*eta2 + G1*eta1 + eta0",
        ],
        "eta0": e0,
        "eta1": e1,
        "eta2": e2,
    }


# -- first integrals in a differential extension ----------------------------------


class DifferentialExtension:
    """Q(x, F, eps) adjoined with formal symbols whose differentials are given
    one-forms (A dx + B dF); e.g. a unit u = f^eps with du = eps*u*df/f."""

    def __init__(self, rules: dict):
        self.rules = {sp.Symbol(k) if isinstance(k, str) else k: (sp.sympify(a), sp.sympify(b))
                      for k, (a, b) in rules.items()}

    def d(self, h) -> tuple:
        h = sp.sympify(h)
        A = sp.diff(h, x)
        B = sp.diff(h, F)
        for s, (a, b) in self.rules.items():
            hs = sp.diff(h, s)
            if hs != 0:
                A += hs * a
                B += hs * b
        return A, B

    @staticmethod
    def is_zero(e) -> bool:
        return sp.cancel(sp.together(e)) == 0


def _form_expr(w: OneForm) -> tuple:
    return w.A.as_expr(), w.B.as_expr()


@dataclass
class FirstIntegralRecord:
    case: str
    phi: str
    G: str
    H: str
    rules: dict
    first_integral_residual: tuple
    log_derivative_residual: tuple

    @property
    def ok(self) -> bool:
        return all(r == 0 for r in self.first_integral_residual + self.log_derivative_residual)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "phi": self.phi,
            "G": self.G,
            "H": self.H,
            "extension": self.rules,
            "dH - G*eta0": [str(r) for r in self.first_integral_residual],
            "dG/G - eta1": [str(r) for r in self.log_derivative_residual],
            "ok": self.ok,
        }


FIRST_INTEGRAL_CASES = ("Liouville1", "Liouville2")


def verify_first_integral(case: str) -> FirstIntegralRecord:
    """Check dH = G*eta0 and dG/G = eta1 for the two Liouvillian deformations."""
    u, P = sp.symbols("u P")
    if case == "Liouville1":
        phi_text = "F/(x-1)"
        # u = (x-1)^eps
        ext = DifferentialExtension({u: (eps * u / (x - 1), 0)})
        G, H = u, u * F
    elif case == "Liouville2":
        phi_text = "1/(x-1) + F/(x+1)"
        # u = (x+1)^eps, P a primitive of u * d((x-1)^eps)/(x-1)^eps
        ext = DifferentialExtension({u: (eps * u / (x + 1), 0), P: (eps * u / (x - 1), 0)})
        G, H = u, u * F + P
    else:
        raise ValueError(f"unknown case {case!r}; expected one of {FIRST_INTEGRAL_CASES}")
    seq = gv_sequence(parse_phi(phi_text))
    e0 = _form_expr(seq.forms[0])
    e1 = _form_expr(seq.forms[1])
    dH = ext.d(H)
    dG = ext.d(G)
    r1 = tuple(sp.cancel(dH[i] - G * e0[i]) for i in range(2))
    r2 = tuple(sp.cancel(dG[i] / G - e1[i]) for i in range(2))
    rules = {str(s): f"({a})*dx + ({b})*dF" for s, (a, b) in ext.rules.items()}
    return FirstIntegralRecord(case, phi_text, str(G), str(H), rules, r1, r2)
