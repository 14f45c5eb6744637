"""Truncated parabolic germs z + a_2 z^2 + ... + a_N z^N.

Coefficients are exact: ints/Fractions, or :class:`~mol.expr.MPoly`
polynomials in ``eps`` and formal units (any other variable name).  Units
carry no relations, so a nonzero polynomial certifies a nonzero coefficient.
Terms of eps-degree above ``eps_order`` are dropped.

Products are compositions: ``compose(f, g) = f o g`` and the group
commutator is ``[f, g] = f o g o f^-1 o g^-1``.  A word ``w1 w2 ... wn``
maps to ``P(w1) o P(w2) o ... o P(wn)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import MPoly, parse_poly
from .freegroup import Word

DEFAULT_ORDER = 12
DEFAULT_EPS_ORDER = 4


class GermError(ValueError):
    pass


class TruncationTooSmall(GermError):
    pass


class TruncationExhausted(GermError):
    pass


class UnassignedGenerator(KeyError):
    pass


class Level(str, Enum):
    IDENTITY = "identity-to-order-N"


def _norm(c):
    if isinstance(c, MPoly):
        if c.is_constant():
            return c.constant()
        return c
    return Fraction(c)


def _fmt_coeff(c) -> str:
    if isinstance(c, MPoly):
        return str(c)
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Germ:
    __slots__ = ("order", "eps_order", "coeffs")

    def __init__(self, coeffs: Mapping[int, object] | Sequence = (), order: int = DEFAULT_ORDER,
                 eps_order: int | None = DEFAULT_EPS_ORDER):
        if order < 2:
            raise GermError("truncation order must be >= 2")
        self.order = order
        self.eps_order = eps_order
        if not isinstance(coeffs, Mapping):
            coeffs = {i + 2: c for i, c in enumerate(coeffs)}
        out = {}
        for i, c in coeffs.items():
            if i < 2:
                raise GermError("parabolic germs only carry coefficients of z^2 and above")
            if i <= order:
                c = self._trunc(c)
                if c:
                    out[i] = _norm(c)
        self.coeffs = out

    def _trunc(self, c):
        if isinstance(c, MPoly) and self.eps_order is not None:
            return c.truncate("eps", self.eps_order)
        return c

    @classmethod
    def identity(cls, order: int = DEFAULT_ORDER, eps_order: int | None = DEFAULT_EPS_ORDER) -> "Germ":
        return cls({}, order, eps_order)

    @classmethod
    def parse(cls, text: str, order: int = DEFAULT_ORDER, eps_order: int | None = DEFAULT_EPS_ORDER) -> "Germ":
        poly = parse_poly(text)
        if poly.coefficient_of("z", 0):
            raise GermError(f"germ has a constant term: {text!r}")
        if poly.coefficient_of("z", 1) != 1:
            raise GermError(f"linear coefficient must be exactly 1: {text!r}")
        coeffs = {}
        for k in range(2, poly.degree_in("z") + 1):
            c = poly.coefficient_of("z", k)
            if c:
                coeffs[k] = c
        return cls(coeffs, order, eps_order)

    def context(self) -> tuple:
        return (self.order, self.eps_order)

    def _check(self, other: "Germ"):
        if self.context() != other.context():
            raise GermError(f"truncation mismatch: {self.context()} vs {other.context()}")

    def __getitem__(self, i: int):
        if i == 1:
            return Fraction(1)
        return self.coeffs.get(i, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, Germ):
            return NotImplemented
        return self.context() == other.context() and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.context(), frozenset((k, str(v)) for k, v in self.coeffs.items())))

    def series(self) -> list:
        s = [0] * (self.order + 1)
        s[1] = 1
        for i, c in self.coeffs.items():
            s[i] = c
        return s

    def _series_mul(self, a: list, b: list) -> list:
        n = self.order
        out = [0] * (n + 1)
        lo_a = next((i for i, x in enumerate(a) if x), n + 1)
        lo_b = next((i for i, x in enumerate(b) if x), n + 1)
        for i in range(lo_a, n + 1 - lo_b):
            x = a[i]
            if not x:
                continue
            for j in range(lo_b, n + 1 - i):
                y = b[j]
                if y:
                    out[i + j] = out[i + j] + x * y
        return [self._trunc(c) for c in out]

    def powers(self) -> list[list]:
        """powers()[i] is the series of this germ raised to the i-th power (i >= 1)."""
        s = self.series()
        out = [None, s]
        for _ in range(2, self.order + 1):
            out.append(self._series_mul(out[-1], s))
        return out

    def compose(self, g: "Germ") -> "Germ":
        """self o g."""
        self._check(g)
        if not self.coeffs:
            return g
        if not g.coeffs:
            return self
        total = g.series()
        power = g.series()
        gs = g.series()
        top = max(self.coeffs)
        for i in range(2, top + 1):
            power = self._series_mul(power, gs)
            a = self.coeffs.get(i)
            if a:
                for k in range(i, self.order + 1):
                    if power[k]:
                        total[k] = total[k] + a * power[k]
        return Germ({k: total[k] for k in range(2, self.order + 1)}, self.order, self.eps_order)

    __matmul__ = compose

    def inverse(self) -> "Germ":
        if not self.coeffs:
            return self
        pw = self.powers()
        b = [0] * (self.order + 1)
        b[1] = 1
        for k in range(2, self.order + 1):
            acc = 0
            for i in range(1, k):
                if b[i] and pw[i][k]:
                    acc = acc + b[i] * pw[i][k]
            b[k] = self._trunc(-acc) if acc else 0
        return Germ({k: b[k] for k in range(2, self.order + 1)}, self.order, self.eps_order)

    def is_identity(self) -> bool:
        return not self.coeffs

    def level(self):
        if not self.coeffs:
            return Level.IDENTITY
        return min(self.coeffs) - 1

    def leading(self):
        """(level, leading coefficient), or (IDENTITY, 0)."""
        if not self.coeffs:
            return Level.IDENTITY, Fraction(0)
        i = min(self.coeffs)
        return i - 1, self.coeffs[i]

    def __str__(self):
        parts = ["z"]
        for i in sorted(self.coeffs):
            c = self.coeffs[i]
            zpow = f"z^{i}"
            if isinstance(c, MPoly):
                if len(c.terms) == 1:
                    s = str(c)
                    sign = "-" if s.startswith("-") else "+"
                    parts.append(f"{sign} {s.lstrip('-')}*{zpow}")
                else:
                    parts.append(f"+ ({c})*{zpow}")
            else:
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                parts.append(f"{sign} {zpow}" if mag == 1 else f"{sign} {_fmt_coeff(mag)}*{zpow}")
        return " ".join(parts)

    def __repr__(self):
        return f"Germ({str(self)!r}, order={self.order}, eps_order={self.eps_order})"

    def to_json(self) -> dict:
        return {
            "germ": str(self),
            "order": self.order,
            "eps_order": self.eps_order,
            "level": _level_json(self.level()),
            "coefficients": {str(i): _fmt_coeff(c) for i, c in sorted(self.coeffs.items())},
        }


def _level_json(level):
    return level.value if isinstance(level, Level) else level


def compose(f: Germ, g: Germ) -> Germ:
    return f.compose(g)


def invert(f: Germ) -> Germ:
    return f.inverse()


def level(f: Germ):
    return f.level()


def commutator(f: Germ, g: Germ) -> Germ:
    f._check(g)
    if f.is_identity() or g.is_identity():
        return Germ.identity(f.order, f.eps_order)
    return f.compose(g).compose(f.inverse()).compose(g.inverse())


@dataclass
class LevelCheck:
    p: object
    q: object
    a: object
    b: object
    predicted: object
    computed: object
    lower_terms_vanish: bool
    commutator: Germ

    @property
    def holds(self) -> bool:
        if isinstance(self.p, Level) or isinstance(self.q, Level):
            return self.commutator.is_identity()
        return self.lower_terms_vanish and self.computed == self.predicted

    @property
    def commutator_level(self):
        return self.commutator.level()

    def to_json(self) -> dict:
        return {
            "p": _level_json(self.p),
            "q": _level_json(self.q),
            "a": _fmt_coeff(self.a),
            "b": _fmt_coeff(self.b),
            "predicted": _fmt_coeff(self.predicted),
            "computed": _fmt_coeff(self.computed),
            "lower_terms_vanish": self.lower_terms_vanish,
            "commutator_level": _level_json(self.commutator_level),
            "holds": self.holds,
        }


def commutator_level_check(f: Germ, g: Germ) -> LevelCheck:
    """Compare the leading term of [f, g] with a*b*(p - q) z^(p+q+1)."""
    f._check(g)
    p, a = f.leading()
    q, b = g.leading()
    h = commutator(f, g)
    if isinstance(p, Level) or isinstance(q, Level):
        return LevelCheck(p, q, a, b, Fraction(0), Fraction(0), h.is_identity(), h)
    top = p + q + 1
    if f.order < top:
        raise TruncationTooSmall(f"need order >= {top}, have {f.order}")
    predicted = _norm(f._trunc(a * b * (p - q)))
    lower = all(not h[k] for k in range(2, top))
    return LevelCheck(p, q, a, b, predicted, h[top], lower, h)


@dataclass
class Abelian:
    generators: int
    checked_pairs: int
    common_level: object = None

    def to_json(self) -> dict:
        return {"verdict": "abelian", "generators": self.generators, "checked_pairs": self.checked_pairs,
                "common_level": _level_json(self.common_level) if self.common_level is not None else None,
                "qualifier": "at truncation"}


@dataclass
class NonAbelianWitness:
    pair: tuple[int, int]
    partner: int
    chain: list[Germ] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    @property
    def levels(self) -> list[int]:
        return [h.level() for h in self.chain]

    def to_json(self) -> dict:
        return {
            "verdict": "non-abelian",
            "qualifier": "non-solvable at truncation",
            "pair": list(self.pair),
            "partner": self.partner,
            "chain": [{"expression": lab, "level": h.level(), "leading_coefficient": _fmt_coeff(h.leading()[1]),
                       "germ": str(h)} for lab, h in zip(self.labels, self.chain)],
        }


def group_dichotomy(gens: Sequence[Germ], budget: int = 3):
    """Abelian, or a chain of ``budget`` nested commutators of strictly
    increasing level (each certified nonidentity at truncation).

    The chain starts from a noncommuting pair [g_i, g_j] and keeps bracketing
    with a generator of minimal level, whose level always differs from that of
    the current commutator, so the level formula predicts a nonidentity result.
    """
    gens = list(gens)
    for g in gens[1:]:
        gens[0]._check(g)
    pairs = 0
    start = None
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            pairs += 1
            h = commutator(gens[i], gens[j])
            if not h.is_identity():
                start = (i, j, h)
                break
        if start:
            break
    if start is None:
        levels = {g.level() for g in gens if not g.is_identity()}
        common = levels.pop() if len(levels) == 1 else None
        return Abelian(len(gens), pairs, common)
    i, j, h = start
    nontrivial = [k for k, g in enumerate(gens) if not g.is_identity()]
    partner = min(nontrivial, key=lambda k: (gens[k].level(), k))
    f = gens[partner]
    p = f.level()
    label = f"[g{i},g{j}]"
    chain, labels = [h], [label]
    while len(chain) < budget:
        nxt_level = h.level() + p
        if nxt_level + 1 > h.order:
            raise TruncationExhausted(
                f"chain needs order >= {nxt_level + 1} (level {nxt_level}), have {h.order}")
        h = commutator(h, f)
        label = f"[{label},g{partner}]"
        if h.is_identity() or h.level() <= chain[-1].level():
            raise TruncationExhausted(f"commutator {label} vanished to order {h.order}")
        chain.append(h)
        labels.append(label)
    return NonAbelianWitness((i, j), partner, chain, labels)


class GermAssignment:
    """Generator name -> germ, all sharing one truncation context."""

    def __init__(self, germs: Mapping[str, Germ], order: int | None = None, eps_order: int | None = None):
        germs = dict(germs)
        ctx = {g.context() for g in germs.values()}
        if len(ctx) > 1:
            raise GermError(f"germs use different truncations: {sorted(ctx, key=str)}")
        if ctx:
            order, eps_order = ctx.pop()
        self.germs = germs
        self.order = DEFAULT_ORDER if order is None else order
        self.eps_order = eps_order

    @classmethod
    def from_json(cls, data: Mapping) -> "GermAssignment":
        order = int(data.get("order", DEFAULT_ORDER))
        eps_order = data.get("eps_order", DEFAULT_EPS_ORDER)
        eps_order = None if eps_order is None else int(eps_order)
        raw = data.get("germs")
        if not isinstance(raw, Mapping) or not raw:
            raise GermError("germ file needs a nonempty 'germs' object")
        return cls({name: Germ.parse(str(text), order, eps_order) for name, text in raw.items()}, order, eps_order)

    @classmethod
    def load(cls, path) -> "GermAssignment":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"order": self.order, "eps_order": self.eps_order,
                "germs": {k: str(g) for k, g in self.germs.items()}}

    def identity(self) -> Germ:
        return Germ.identity(self.order, self.eps_order)

    def __getitem__(self, name: str) -> Germ:
        try:
            return self.germs[name]
        except KeyError:
            raise UnassignedGenerator(name) from None


def poincare_rep(asgn: GermAssignment, w: Word) -> Germ:
    """Image of w under the homomorphism extending the assignment."""
    names = w.alphabet.names
    cache: dict[int, Germ] = {}
    out = asgn.identity()
    for x in w.letters:
        g = cache.get(x)
        if g is None:
            base = asgn[names[abs(x) - 1]]
            g = base if x > 0 else base.inverse()
            cache[x] = g
        out = out.compose(g)
    return out


def wronskian_assignment(order: int = DEFAULT_ORDER, eps_order: int = DEFAULT_EPS_ORDER) -> GermAssignment:
    """d1 -> z + eps*u_d1*z^2, d2 -> z + eps*u_d2*z^3 with formal units u_d1, u_d2."""
    return GermAssignment.from_json({
        "order": order,
        "eps_order": eps_order,
        "germs": {"d1": "z + eps*u_d1*z^2", "d2": "z + eps*u_d2*z^3"},
    })
