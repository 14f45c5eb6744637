"""Truncated free Lie algebra over Q.

The Hall basis used throughout is the Lyndon basis: Lyndon words over the
ordered alphabet, bracketed by their standard factorization ``w = u v`` (``v``
the longest proper Lyndon suffix), ordered by degree and then
lexicographically.  Its key property is triangularity: the expansion of the
bracket of ``w`` is ``w`` plus words that are lexicographically larger, which
turns "express this Lie polynomial in the basis" into back-substitution.

Group elements enter through the Magnus embedding ``x_i -> 1 + X_i``.  For a
free group, the lowest nonconstant degree of the Magnus image is exactly the
lower-central-series degree, and that lowest homogeneous part is a Lie
polynomial.
"""

from __future__ import annotations

import heapq
import os
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping, Sequence

from .freegroup import Word
from .linalg import RowSpace, axpy

DEFAULT_CLASS = 6
DEFAULT_MAX_BASIS = 10**6


class ResourceLimitError(RuntimeError):
    pass


class NotALiePolynomial(ValueError):
    def __init__(self, residual):
        super().__init__(f"not a Lie polynomial; residual has {len(residual)} terms")
        self.residual = residual


def max_basis_size() -> int:
    raw = os.environ.get("MOL_MAX_BASIS")
    return int(raw) if raw else DEFAULT_MAX_BASIS


def mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def witt_dimension(rank: int, degree: int) -> int:
    total = sum(mobius(d) * rank ** (degree // d) for d in range(1, degree + 1) if degree % d == 0)
    return total // degree


def lyndon_words(rank: int, max_len: int) -> list[tuple[int, ...]]:
    """All Lyndon words of length <= max_len in lexicographic order (Duval)."""
    out = []
    if rank < 1 or max_len < 1:
        return out
    w = [0]
    while w:
        out.append(tuple(w))
        m = len(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == rank - 1:
            w.pop()
        if w:
            w[-1] += 1
    return out


def default_names(rank: int) -> tuple[str, ...]:
    if rank <= 26:
        return tuple(chr(ord("A") + i) for i in range(rank))
    return tuple(f"X{i + 1}" for i in range(rank))


# -- noncommutative polynomials -------------------------------------------------
# dict: word (tuple of letter indices) -> coefficient


def nc_mul(a: Mapping, b: Mapping, c: int) -> dict:
    out: dict = {}
    by_len: dict[int, list] = {}
    for w, x in b.items():
        by_len.setdefault(len(w), []).append((w, x))
    for u, x in a.items():
        room = c - len(u)
        for n, items in by_len.items():
            if n > room:
                continue
            for v, y in items:
                k = u + v
                s = out.get(k, 0) + x * y
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
    return out


def nc_bracket(a: Mapping, b: Mapping, c: int) -> dict:
    out = nc_mul(a, b, c)
    axpy(out, -1, nc_mul(b, a, c))
    return out


class NCSeries:
    """Truncated noncommutative power series with rational coefficients."""

    __slots__ = ("terms", "c")

    def __init__(self, terms: Mapping, c: int):
        self.c = c
        self.terms = {w: x for w, x in terms.items() if x and len(w) <= c}

    @classmethod
    def one(cls, c: int) -> "NCSeries":
        return cls({(): 1}, c)

    def __eq__(self, other):
        if not isinstance(other, NCSeries):
            return NotImplemented
        return self.c == other.c and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        axpy(out, 1, other.terms)
        return NCSeries(out, min(self.c, other.c))

    def __sub__(self, other):
        out = dict(self.terms)
        axpy(out, -1, other.terms)
        return NCSeries(out, min(self.c, other.c))

    def __mul__(self, other):
        if isinstance(other, NCSeries):
            c = min(self.c, other.c)
            return NCSeries(nc_mul(self.terms, other.terms, c), c)
        return NCSeries({w: x * other for w, x in self.terms.items()}, self.c)

    __rmul__ = __mul__

    def constant(self):
        return self.terms.get((), 0)

    def homogeneous(self, degree: int) -> dict:
        return {w: x for w, x in self.terms.items() if len(w) == degree}

    def lowest_degree(self, start: int = 1):
        degrees = [len(w) for w in self.terms if len(w) >= start]
        return min(degrees) if degrees else None

    def exp(self) -> "NCSeries":
        if self.constant():
            raise ValueError("exp needs a series without constant term")
        out = NCSeries.one(self.c)
        power = NCSeries.one(self.c)
        for k in range(1, self.c + 1):
            power = power * self
            out = out + power * Fraction(1, factorial(k))
        return out

    def log(self) -> "NCSeries":
        if self.constant() != 1:
            raise ValueError("log needs constant term 1")
        y = self - NCSeries.one(self.c)
        out = NCSeries({}, self.c)
        power = NCSeries.one(self.c)
        for k in range(1, self.c + 1):
            power = power * y
            out = out + power * Fraction((-1) ** (k + 1), k)
        return out

    def __repr__(self):
        return f"NCSeries({len(self.terms)} terms, c={self.c})"


# -- Hall (Lyndon) basis ---------------------------------------------------------


class HallBasis:
    """Lyndon basis of the free Lie algebra on ``names`` through degree ``c``."""

    def __init__(self, names: Sequence[str] | int, c: int, max_size: int | None = None):
        if isinstance(names, int):
            names = default_names(names)
        self.names = tuple(names)
        self.rank = len(self.names)
        if c < 1:
            raise ValueError("class must be >= 1")
        self.c = c
        cap = max_basis_size() if max_size is None else max_size
        size = sum(witt_dimension(self.rank, j) for j in range(1, c + 1)) if self.rank else 0
        if size > cap:
            raise ResourceLimitError(f"Hall basis of rank {self.rank} through degree {c} has {size} elements (cap {cap})")
        self._by_degree: dict[int, list[tuple[int, ...]]] = {j: [] for j in range(1, c + 1)}
        for w in lyndon_words(self.rank, c):
            self._by_degree[len(w)].append(w)
        self._index = {w: i for j in self._by_degree for i, w in enumerate(self._by_degree[j])}
        self._expansion: dict[tuple[int, ...], dict] = {}
        self._factor: dict[tuple[int, ...], tuple] = {}
        self._letter_bracket: dict = {}

    def __eq__(self, other):
        return isinstance(other, HallBasis) and (self.names, self.c) == (other.names, other.c)

    def __hash__(self):
        return hash((self.names, self.c))

    def __repr__(self):
        return f"HallBasis({list(self.names)}, c={self.c})"

    def words(self, degree: int) -> list[tuple[int, ...]]:
        return self._by_degree.get(degree, [])

    def dimension(self, degree: int) -> int:
        return len(self.words(degree))

    def degree_sizes(self) -> list[int]:
        return [self.dimension(j) for j in range(1, self.c + 1)]

    def __contains__(self, w):
        return w in self._index

    def index(self, w) -> int:
        return self._index[w]

    def factor(self, w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Standard factorization of a Lyndon word of length >= 2."""
        f = self._factor.get(w)
        if f is None:
            for i in range(1, len(w)):
                if w[i:] in self._index:
                    f = (w[:i], w[i:])
                    break
            self._factor[w] = f
        return f

    def tree(self, w):
        if len(w) == 1:
            return w[0]
        u, v = self.factor(w)
        return (self.tree(u), self.tree(v))

    def bracket_str(self, w) -> str:
        if len(w) == 1:
            return self.names[w[0]]
        u, v = self.factor(w)
        return f"[{self.bracket_str(u)},{self.bracket_str(v)}]"

    def expansion(self, w) -> dict:
        """Noncommutative polynomial of the bracketed Lyndon word (integer coefficients)."""
        e = self._expansion.get(w)
        if e is None:
            if len(w) == 1:
                e = {w: 1}
            else:
                u, v = self.factor(w)
                e = nc_bracket(self.expansion(u), self.expansion(v), len(w))
            self._expansion[w] = e
        return e

    def to_nc(self, coords: Mapping) -> dict:
        out: dict = {}
        for w, x in coords.items():
            axpy(out, x, self.expansion(w))
        return out

    def from_nc(self, poly: Mapping, strict: bool = True) -> dict:
        """Hall coordinates of a Lie polynomial, by triangular elimination.

        Words longer than ``c`` are discarded.  Raises NotALiePolynomial if the
        input is not in the free Lie algebra (unless ``strict`` is False, in
        which case the residual is silently dropped).
        """
        work = {w: Fraction(x) for w, x in poly.items() if x and 0 < len(w) <= self.c}
        if () in poly and poly[()] and strict:
            raise NotALiePolynomial({(): poly[()]})
        coords: dict = {}
        heap = [(len(w), w) for w in work]
        heapq.heapify(heap)
        residual = {}
        while heap:
            _, w = heapq.heappop(heap)
            x = work.get(w)
            if not x:
                continue
            if w not in self._index:
                residual[w] = x
                del work[w]
                continue
            coords[w] = x
            for v, y in self.expansion(w).items():
                s = work.get(v, 0) - x * y
                if v not in work:
                    heapq.heappush(heap, (len(v), v))
                if s:
                    work[v] = s
                else:
                    work.pop(v, None)
        if residual and strict:
            raise NotALiePolynomial(residual)
        return coords

    def bracket_letter(self, w, i: int) -> dict:
        """Hall coordinates of [w, X_i] (empty above degree c)."""
        key = (w, i)
        out = self._letter_bracket.get(key)
        if out is None:
            if len(w) + 1 > self.c:
                out = {}
            else:
                out = self.from_nc(nc_bracket(self.expansion(w), {(i,): 1}, len(w) + 1))
            self._letter_bracket[key] = out
        return out

    def element(self, coords: Mapping) -> "LieElement":
        return LieElement(self, coords)

    def generator(self, i: int | str) -> "LieElement":
        if isinstance(i, str):
            i = self.names.index(i)
        return LieElement(self, {(i,): 1})

    def generators(self) -> list["LieElement"]:
        return [self.generator(i) for i in range(self.rank)]

    def basis_element(self, w) -> "LieElement":
        return LieElement(self, {tuple(w): 1})

    def zero(self) -> "LieElement":
        return LieElement(self, {})


def hall_basis(rank: int, c: int, names: Sequence[str] | None = None) -> HallBasis:
    if rank < 1:
        raise ValueError("rank must be >= 1")
    return HallBasis(names if names is not None else rank, c)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class LieElement:
    """Element of the truncated free Lie algebra, in Hall coordinates."""

    __slots__ = ("basis", "coords")

    def __init__(self, basis: HallBasis, coords: Mapping):
        self.basis = basis
        self.coords = {tuple(w): Fraction(x) for w, x in coords.items() if x}

    def _check(self, other):
        if self.basis != other.basis:
            raise ValueError("Lie elements live in different algebras")

    def __eq__(self, other):
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.basis == other.basis and self.coords == other.coords

    def __hash__(self):
        return hash(frozenset(self.coords.items()))

    def __add__(self, other):
        self._check(other)
        out = dict(self.coords)
        axpy(out, 1, other.coords)
        return LieElement(self.basis, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.coords)
        axpy(out, -1, other.coords)
        return LieElement(self.basis, out)

    def __neg__(self):
        return LieElement(self.basis, {w: -x for w, x in self.coords.items()})

    def __mul__(self, scalar):
        return LieElement(self.basis, {w: x * scalar for w, x in self.coords.items()})

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.coords)

    def is_zero(self) -> bool:
        return not self.coords

    def bracket(self, other: "LieElement") -> "LieElement":
        self._check(other)
        b = self.basis
        if len(other.coords) == 1:
            (w, y), = other.coords.items()
            if len(w) == 1:
                out: dict = {}
                for u, x in self.coords.items():
                    axpy(out, x * y, b.bracket_letter(u, w[0]))
                return LieElement(b, out)
        poly = nc_bracket(b.to_nc(self.coords), b.to_nc(other.coords), b.c)
        return LieElement(b, b.from_nc(poly))

    def degrees(self) -> list[int]:
        return sorted({len(w) for w in self.coords})

    def component(self, degree: int) -> "LieElement":
        return LieElement(self.basis, {w: x for w, x in self.coords.items() if len(w) == degree})

    def components(self) -> dict[int, "LieElement"]:
        return {j: self.component(j) for j in self.degrees()}

    def lowest_degree(self):
        d = self.degrees()
        return d[0] if d else None

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def to_nc(self) -> NCSeries:
        return NCSeries(self.basis.to_nc(self.coords), self.basis.c)

    def to_json(self) -> list:
        b = self.basis
        key = lambda w: (len(w), w)
        return [[b.bracket_str(w), _fmt(self.coords[w])] for w in sorted(self.coords, key=key)]

    def __str__(self):
        if not self.coords:
            return "0"
        parts = []
        for tree, coef in self.to_json():
            if coef == "1":
                parts.append(f"+ {tree}")
            elif coef == "-1":
                parts.append(f"- {tree}")
            elif coef.startswith("-"):
                parts.append(f"- {coef[1:]}*{tree}")
            else:
                parts.append(f"+ {coef}*{tree}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"LieElement({self})"


def bracket(x: LieElement, y: LieElement) -> LieElement:
    return x.bracket(y)


# -- group elements --------------------------------------------------------------


class LCS(str, Enum):
    IDENTITY = "identity"
    EXCEEDS = "exceeds c"


def magnus(w: Word, c: int) -> NCSeries:
    """Magnus image of ``w`` truncated at degree ``c`` (integer coefficients)."""
    terms: dict = {(): 1}
    for x in w.letters:
        i = abs(x) - 1
        out: dict = {}
        for u, a in terms.items():
            room = c - len(u)
            out[u] = out.get(u, 0) + a
            if x > 0:
                if room >= 1:
                    k = u + (i,)
                    out[k] = out.get(k, 0) + a
            else:
                k = u
                for n in range(1, room + 1):
                    k = k + (i,)
                    out[k] = out.get(k, 0) + (a if n % 2 == 0 else -a)
        terms = {u: a for u, a in out.items() if a}
    return NCSeries(terms, c)


def lcs_degree(w: Word, c: int):
    """Largest j <= c with w in the j-th lower central term, read off Magnus.

    Returns ``LCS.IDENTITY`` for the empty word and ``LCS.EXCEEDS`` when the
    Magnus image is 1 through degree c.
    """
    if w.is_identity():
        return LCS.IDENTITY
    d = magnus(w, c).lowest_degree()
    return LCS.EXCEEDS if d is None else d


class DegreeExceeded(ValueError):
    pass


def log_leading(w: Word, c: int, basis: HallBasis | None = None) -> LieElement:
    """Lowest nonconstant homogeneous part of magnus(w), in Hall coordinates.

    It is a Lie polynomial and coincides with the leading part of
    :func:`lie_log`, since the two substitutions x -> 1 + X and x -> exp(X)
    differ only in higher degrees.
    """
    if w.is_identity():
        raise ValueError("log_leading of the identity")
    if basis is None:
        basis = HallBasis(w.alphabet.names, c)
    elif basis.names != w.alphabet.names:
        raise ValueError("basis and word alphabets differ")
    series = magnus(w, min(c, basis.c))
    d = series.lowest_degree()
    if d is None:
        raise DegreeExceeded(f"{w} lies deeper than degree {c}")
    return LieElement(basis, basis.from_nc(series.homogeneous(d)))


def exponential_image(w: Word, c: int) -> NCSeries:
    """Image of ``w`` under the group-like map x_i -> exp(X_i), truncated at c.

    Shares its lowest nonconstant part with :func:`magnus`, but its logarithm
    is a Lie series.
    """
    out = NCSeries.one(c)
    cache: dict[int, NCSeries] = {}
    for x in w.letters:
        e = cache.get(x)
        if e is None:
            e = NCSeries({(abs(x) - 1,): 1 if x > 0 else -1}, c).exp()
            cache[x] = e
        out = out * e
    return out


def lie_log(w: Word, c: int, basis: HallBasis | None = None) -> LieElement:
    """log of the group-like image of ``w``, in Hall coordinates up to degree c."""
    if basis is None:
        basis = HallBasis(w.alphabet.names, c)
    series = exponential_image(w, min(c, basis.c)).log()
    return LieElement(basis, basis.from_nc(series.terms))


def bch(x: LieElement, y: LieElement, c: int | None = None) -> LieElement:
    """Z with exp(Z) = exp(X) exp(Y), truncated at degree c."""
    x._check(y)
    b = x.basis
    c = b.c if c is None else min(c, b.c)
    if (x.coords and min(x.degrees()) < 1) or (y.coords and min(y.degrees()) < 1):
        raise ValueError("inputs must have degree >= 1")
    ex = NCSeries(x.basis.to_nc(x.coords), c).exp()
    ey = NCSeries(y.basis.to_nc(y.coords), c).exp()
    z = (ex * ey).log()
    return LieElement(b, b.from_nc(z.terms))


# -- graded subspaces ------------------------------------------------------------


class GradedSubspace:
    """Graded subspace of a truncated free Lie algebra: one row space per degree."""

    def __init__(self, basis: HallBasis, spaces: Mapping[int, RowSpace] | None = None):
        self.basis = basis
        self.spaces = {j: RowSpace() for j in range(1, basis.c + 1)}
        if spaces:
            for j, s in spaces.items():
                self.spaces[j] = s

    @classmethod
    def full(cls, basis: HallBasis, degrees: Iterable[int] | None = None) -> "GradedSubspace":
        out = cls(basis)
        for j in degrees if degrees is not None else range(1, basis.c + 1):
            out.spaces[j] = full_space(basis, j)
        return out

    def space(self, degree: int) -> RowSpace:
        return self.spaces.get(degree, RowSpace())

    def dim(self, degree: int) -> int:
        return self.space(degree).dim

    def dims(self) -> list[int]:
        return [self.dim(j) for j in range(1, self.basis.c + 1)]

    def is_full(self, degree: int) -> bool:
        return self.dim(degree) == self.basis.dimension(degree)

    def is_zero(self) -> bool:
        return all(s.dim == 0 for s in self.spaces.values())

    def contains(self, x: LieElement) -> bool:
        if x.basis != self.basis:
            raise ValueError("element from a different algebra")
        return all(self.space(j).contains(x.component(j).coords) for j in x.degrees())

    def __contains__(self, x):
        return self.contains(x)

    def basis_elements(self, degree: int) -> list[LieElement]:
        return [LieElement(self.basis, r) for r in self.space(degree).basis()]

    def issubspace(self, other: "GradedSubspace") -> bool:
        return all(self.space(j).issubspace(other.space(j)) for j in self.spaces)

    def to_json(self) -> dict:
        b = self.basis
        degrees = []
        for j in range(1, b.c + 1):
            words = b.words(j)
            rows = [[_fmt(r.get(w, Fraction(0))) for w in words] for r in self.space(j).basis()]
            degrees.append({
                "degree": j,
                "hall_basis": [b.bracket_str(w) for w in words],
                "dimension": len(rows),
                "rows": rows,
            })
        return {"generators": list(b.names), "class": b.c, "qualifier": "rational", "degrees": degrees}


def full_space(basis: HallBasis, degree: int) -> RowSpace:
    s = RowSpace()
    s.rows = {w: {w: Fraction(1)} for w in basis.words(degree)}
    return s


def bracket_with_generators(basis: HallBasis, space: RowSpace, degree: int) -> RowSpace:
    """Row space of [space, g_1] in degree ``degree`` (space lives one below)."""
    if degree > 1 and space.dim == basis.dimension(degree - 1) and space.dim:
        return full_space(basis, degree)
    out = RowSpace()
    for row in space.rows.values():
        for i in range(basis.rank):
            v: dict = {}
            for w, x in row.items():
                axpy(v, x, basis.bracket_letter(w, i))
            out.add(v)
            if out.dim == basis.dimension(degree):
                return out
    return out


def ideal_closure(gens: Iterable[LieElement], ambient: HallBasis) -> GradedSubspace:
    """Smallest graded ideal containing every homogeneous component of ``gens``."""
    by_degree: dict[int, list[dict]] = {}
    for g in gens:
        if g.basis != ambient:
            raise ValueError("generator from a different algebra")
        for j, comp in g.components().items():
            by_degree.setdefault(j, []).append(comp.coords)
    out = GradedSubspace(ambient)
    prev = RowSpace()
    for j in range(1, ambient.c + 1):
        s = bracket_with_generators(ambient, prev, j) if j > 1 else RowSpace()
        for v in by_degree.get(j, []):
            s.add(v)
        out.spaces[j] = s
        prev = s
    return out


def graded_membership(x: LieElement, space: GradedSubspace) -> bool:
    return space.contains(x)
