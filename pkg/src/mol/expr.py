"""Arithmetic expressions in named variables.

Grammar (used for deformation functions and germ files)::

    expr   = [ "+" | "-" ] term { ( "+" | "-" ) term } ;
    term   = factor { ( "*" | "/" ) factor } ;
    factor = atom [ "^" [ "-" ] integer ] ;
    atom   = integer | name | "(" expr ")" ;

Evaluation is delegated to a target algebra: ``evaluate(text, leaf)`` maps
integers and names through ``leaf`` and combines the results with the Python
operators ``+ - * / **``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Mapping


class ExpressionError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text) and text[pos:].strip():
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError("unexpected character", text, pos + len(text[pos:]) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def evaluate(text: str, leaf: Callable[[str, object], object]):
    """Parse and evaluate ``text``.

    ``leaf(kind, value)`` is called with ``("int", int)`` or ``("name", str)``.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos]

    def advance():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        sign = None
        if peek()[1] in "+-" and peek()[0] == "op":
            sign = advance()[1]
        value = term()
        if sign == "-":
            value = -value
        while peek()[0] == "op" and peek()[1] in "+-":
            op = advance()[1]
            rhs = term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term():
        value = factor()
        while peek()[0] == "op" and peek()[1] in "*/":
            op = advance()[1]
            rhs = factor()
            value = value * rhs if op == "*" else value / rhs
        return value

    def factor():
        value = atom()
        if peek()[1] == "^" and peek()[0] == "op":
            advance()
            neg = False
            if peek()[1] == "-":
                advance()
                neg = True
            kind, v, p = advance()
            if kind != "int":
                raise ExpressionError("expected integer exponent", text, p)
            n = int(v)
            value = value ** (-n if neg else n)
        return value

    def atom():
        kind, v, p = advance()
        if kind == "int":
            return leaf("int", int(v))
        if kind == "name":
            return leaf("name", v)
        if v == "(":
            value = expr()
            k2, v2, p2 = advance()
            if v2 != ")":
                raise ExpressionError("expected ')'", text, p2)
            return value
        raise ExpressionError("unexpected token", text, p)

    if tokens[0][0] == "end":
        raise ExpressionError("empty expression", text, 0)
    try:
        value = expr()
    except ZeroDivisionError:
        raise ExpressionError("division by zero", text) from None
    if peek()[0] != "end":
        raise ExpressionError("unexpected token", text, peek()[2])
    return value


Monomial = tuple  # sorted tuple of (variable, exponent) pairs


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class MPoly:
    """Polynomial with rational coefficients in named commuting variables."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c) -> "MPoly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "MPoly":
        return cls({((name, power),): 1}) if power else cls.const(1)

    @staticmethod
    def lift(x) -> "MPoly":
        if isinstance(x, MPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return MPoly.const(x)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = MPoly.lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = MPoly.lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        r = MPoly()
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self):
        r = MPoly()
        r.terms = {m: -c for m, c in self.terms.items()}
        return r

    def __sub__(self, other):
        other = MPoly.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return MPoly()
            r = MPoly()
            r.terms = {m: c * other for m, c in self.terms.items()}
            return r
        other = MPoly.lift(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        r = MPoly()
        r.terms = out
        return r

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MPoly):
            if not other.is_constant() or not other:
                raise ExpressionError("division by a non-constant polynomial")
            other = other.constant()
        if not other:
            raise ZeroDivisionError
        return self * (1 / Fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            if self.is_constant() and self:
                return MPoly.const(1 / self.constant() ** -n)
            raise ExpressionError("negative power of a non-constant polynomial")
        out = MPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def degree_in(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self.terms), default=-1)

    def truncate(self, name: str, max_degree: int) -> "MPoly":
        r = MPoly()
        r.terms = {m: c for m, c in self.terms.items() if dict(m).get(name, 0) <= max_degree}
        return r

    def coefficient_of(self, name: str, power: int) -> "MPoly":
        """Coefficient of name^power, as a polynomial in the other variables."""
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.get(name, 0) == power:
                d.pop(name, None)
                out[tuple(sorted(d.items()))] = c
        return MPoly(out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (sum(e for _, e in m), m)):
            c = self.terms[m]
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            mag = abs(c)
            cs = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if not mono:
                body = cs
            elif mag == 1:
                body = mono
            else:
                body = f"{cs}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"MPoly({self})"


def parse_poly(text: str, allowed: set[str] | None = None) -> MPoly:
    def leaf(kind, value):
        if kind == "int":
            return MPoly.const(value)
        if allowed is not None and value not in allowed:
            raise ExpressionError(f"unknown variable {value!r}", text)
        return MPoly.var(value)

    return MPoly.lift(evaluate(text, leaf))
