"""Sparse exact row spaces over the rationals.

Vectors are dicts ``column -> Fraction`` with no zero entries; columns are
any mutually comparable hashable keys.  A :class:`RowSpace` keeps its rows in
reduced row echelon form, so reducing a vector is a single pass over the
pivots it touches.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping

Vector = dict


def clean(v: Mapping) -> dict:
    return {k: Fraction(c) for k, c in v.items() if c}


def axpy(y: dict, a, x: Mapping) -> None:
    """y += a*x in place, dropping zeros."""
    for k, c in x.items():
        s = y.get(k, 0) + a * c
        if s:
            y[k] = s
        else:
            y.pop(k, None)


class RowSpace:
    """Subspace spanned by rational vectors, stored in reduced echelon form."""

    def __init__(self, vectors: Iterable[Mapping] = ()):
        self.rows: dict[Hashable, dict] = {}
        for v in vectors:
            self.add(v)

    def __len__(self):
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def copy(self) -> "RowSpace":
        out = RowSpace()
        out.rows = {p: dict(r) for p, r in self.rows.items()}
        return out

    def reduce(self, v: Mapping) -> dict:
        """Residual of v modulo the space (zero iff v is in the span)."""
        r = clean(v)
        for p in [k for k in r if k in self.rows]:
            c = r.get(p)
            if c:
                axpy(r, -c, self.rows[p])
        return r

    def contains(self, v: Mapping) -> bool:
        return not self.reduce(v)

    def add(self, v: Mapping) -> bool:
        """Insert v; return True if the dimension grew."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        inv = 1 / r[p]
        r = {k: c * inv for k, c in r.items()}
        for row in self.rows.values():
            c = row.get(p)
            if c:
                axpy(row, -c, r)
        self.rows[p] = r
        return True

    def basis(self) -> list[dict]:
        return [dict(self.rows[p]) for p in sorted(self.rows)]

    def pivots(self) -> list:
        return sorted(self.rows)

    def issubspace(self, other: "RowSpace") -> bool:
        return all(other.contains(r) for r in self.rows.values())

    def __eq__(self, other):
        if not isinstance(other, RowSpace):
            return NotImplemented
        return self.rows == other.rows


def kernel(columns: Mapping[Hashable, Mapping]) -> list[dict]:
    """Basis of the kernel of the linear map sending unit vector ``e_j`` to
    ``columns[j]``.  Kernel vectors are dicts over the keys of ``columns``."""
    # Row reduce the transposed system: track combinations of unit vectors.
    image = RowSpace()
    combos: dict[Hashable, dict] = {}
    out = []
    for j in sorted(columns):
        v = clean(columns[j])
        combo = {j: Fraction(1)}
        for p in [k for k in v if k in image.rows]:
            c = v.get(p)
            if c:
                axpy(v, -c, image.rows[p])
                axpy(combo, -c, combos[p])
        if not v:
            out.append(combo)
            continue
        p = min(v)
        inv = 1 / v[p]
        v = {k: c * inv for k, c in v.items()}
        combo = {k: c * inv for k, c in combo.items()}
        for q, row in image.rows.items():
            c = row.get(p)
            if c:
                axpy(row, -c, v)
                axpy(combos[q], -c, combo)
        image.rows[p] = v
        combos[p] = combo
    return out
