"""Orbit depth, nilpotence class and derived length, computed over Q on the
associated graded Lie algebra of the free group.

The orbit ideal I is generated by the leading Lie terms of the cycle and of
every orbit word.  Degree-one generators span a subspace U of g_1, and
g / (U) is again free, on g_1 / U.  So I is the preimage of an ideal K of
that smaller free algebra f, generated by the projections of the
higher-degree leading terms.  For m >= 2 this gives

    I_m = pi^-1(K_m),   [I, g]_m = pi^-1([K, f]_m),

and all depth / quotient questions reduce to linear algebra inside f.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema

from .freegroup import Alphabet, Word, WordSyntaxError, parse
from .lie import (
    LCS,
    GradedSubspace,
    HallBasis,
    LieElement,
    bracket_with_generators,
    ideal_closure,
    lcs_degree,
    log_leading,
)
from .linalg import RowSpace, axpy, kernel

BUILTIN_CONFIGS = ("generic4", "trapezoid", "parallelogram")


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class InvariantViolation(AssertionError):
    pass


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["name", "alphabet", "cycle"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "alphabet": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "cycle": {"type": "string"},
        "cycle_name": {"type": "string", "minLength": 1},
        "auxiliary_cycles": {"type": "object", "additionalProperties": {"type": "string"}},
        "orbit_families": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["template"],
                "additionalProperties": False,
                "properties": {
                    "template": {"type": "string"},
                    "param": {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"},
                    "range": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "items": {"anyOf": [
                            {"type": "integer", "minimum": 0},
                            {"type": "string", "pattern": r"^c\s*([+-]\s*\d+)?$"},
                        ]},
                    },
                    "label": {"type": "string"},
                },
            },
        },
        "intersections": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "string"}, {"type": "string"}, {"type": "integer"}],
                "minItems": 3,
                "maxItems": 3,
            },
        },
        "notes": {"type": "string"},
    },
}


def _bound(expr, c: int) -> int:
    if isinstance(expr, int):
        return expr
    m = re.fullmatch(r"c\s*(?:([+-])\s*(\d+))?", expr.strip())
    off = 0
    if m.group(1):
        off = int(m.group(2)) * (1 if m.group(1) == "+" else -1)
    return c + off


@dataclass(frozen=True)
class Family:
    template: str
    param: str | None = None
    range: tuple | None = None
    label: str | None = None

    def instances(self, c: int) -> list[int | None]:
        if self.param is None:
            return [None]
        lo, hi = (_bound(b, c) for b in self.range)
        return list(range(max(lo, 0), hi + 1))


@dataclass
class Configuration:
    name: str
    alphabet: Alphabet
    cycle: Word
    cycle_name: str = "gamma"
    auxiliary_cycles: dict[str, Word] = field(default_factory=dict)
    orbit_families: list[Family] = field(default_factory=list)
    intersections: list[tuple[str, str, int]] = field(default_factory=list)
    notes: str = ""
    source: dict = field(default_factory=dict, repr=False)

    def bindings(self) -> dict[str, Word]:
        return {self.cycle_name: self.cycle, **self.auxiliary_cycles}

    def orbit_words(self, c: int) -> list[tuple[str, Word]]:
        """The cycle followed by every instantiated family word."""
        out = [(self.cycle_name, self.cycle)]
        for fam in self.orbit_families:
            for m in fam.instances(c):
                params = {} if m is None else {fam.param: m}
                w = parse(fam.template, self.alphabet, params, self.bindings())
                label = fam.label or fam.template
                out.append((label if m is None else f"{label} [{fam.param}={m}]", w))
        return out

    def intersection(self, a: str, b: str) -> int | None:
        for p, q, v in self.intersections:
            if (p, q) == (a, b):
                return v
            if (p, q) == (b, a):
                return -v
        return None

    def with_family(self, template: str, **kw) -> "Configuration":
        data = json.loads(json.dumps(self.source))
        data.setdefault("orbit_families", []).append({"template": template, **kw})
        if "name" in kw:
            data["name"] = kw.pop("name")
        return Configuration.from_json(data)

    def to_json(self) -> dict:
        return json.loads(json.dumps(self.source))

    @classmethod
    def from_json(cls, data: Mapping, where: str = "") -> "Configuration":
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            raise ConfigError(e.message, (where + ":" if where else "") + (e.json_path or "$"))
        try:
            alphabet = Alphabet(data["alphabet"])
        except ValueError as exc:
            raise ConfigError(str(exc), "$.alphabet") from None
        cycle_name = data.get("cycle_name", "gamma")
        if cycle_name in alphabet.names:
            raise ConfigError(f"cycle name {cycle_name!r} clashes with a generator", "$.cycle_name")

        def word(text, path, bindings=None):
            try:
                return parse(text, alphabet, bindings=bindings)
            except (WordSyntaxError, KeyError, ValueError) as exc:
                raise ConfigError(str(exc), path) from None

        cycle = word(data["cycle"], "$.cycle")
        aux = {}
        for name, text in data.get("auxiliary_cycles", {}).items():
            if name in alphabet.names or name == cycle_name:
                raise ConfigError(f"auxiliary cycle {name!r} clashes with another name", f"$.auxiliary_cycles.{name}")
            aux[name] = word(text, f"$.auxiliary_cycles.{name}", {cycle_name: cycle})
        families = []
        for i, fam in enumerate(data.get("orbit_families", [])):
            path = f"$.orbit_families[{i}]"
            param = fam.get("param")
            rng = fam.get("range")
            if rng is not None and param is None:
                param = "m"
            if param is not None and rng is None:
                raise ConfigError("a parametric family needs a range", path)
            f = Family(fam["template"], param, tuple(rng) if rng else None, fam.get("label"))
            try:
                probe = f.instances(4)[:1] or [0]
                for m in probe:
                    parse(f.template, alphabet, {} if param is None else {param: m or 0},
                          {cycle_name: cycle, **aux})
            except (WordSyntaxError, KeyError, ValueError) as exc:
                raise ConfigError(str(exc), path + ".template") from None
            families.append(f)
        known = set(alphabet.names) | {cycle_name} | set(aux)
        seen: dict[tuple[str, str], int] = {}
        for i, (a, b, v) in enumerate(data.get("intersections", [])):
            path = f"$.intersections[{i}]"
            for n in (a, b):
                if n not in known:
                    raise ConfigError(f"unknown cycle {n!r}", path)
            if a == b and v != 0:
                raise ConfigError("self-intersection must be 0", path)
            if (b, a) in seen and seen[(b, a)] != -v:
                raise ConfigError(f"intersection ({a},{b}) is not antisymmetric", path)
            if (a, b) in seen and seen[(a, b)] != v:
                raise ConfigError(f"conflicting intersection ({a},{b})", path)
            seen[(a, b)] = v
        return cls(
            name=data["name"],
            alphabet=alphabet,
            cycle=cycle,
            cycle_name=cycle_name,
            auxiliary_cycles=aux,
            orbit_families=families,
            intersections=[tuple(t) for t in data.get("intersections", [])],
            notes=data.get("notes", ""),
            source=json.loads(json.dumps(data)),
        )


def builtin_config_json(name: str) -> dict:
    if name not in BUILTIN_CONFIGS:
        raise ConfigError(f"unknown built-in configuration {name!r}; choose from {', '.join(BUILTIN_CONFIGS)}")
    text = resources.files("mol").joinpath(f"configs/{name}.json").read_text()
    return json.loads(text)


def load_config(name_or_path: str | Path) -> Configuration:
    """A built-in name (generic4, trapezoid, parallelogram) or a JSON file path."""
    if str(name_or_path) in BUILTIN_CONFIGS:
        return Configuration.from_json(builtin_config_json(str(name_or_path)), str(name_or_path))
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(f"no such configuration file or built-in: {name_or_path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", str(path)) from None
    return Configuration.from_json(data, str(path))


# -- bounds and reports ----------------------------------------------------------


@dataclass(frozen=True)
class Bound:
    """A certified value, or a lower bound at the class cutoff."""

    value: int
    certified: bool = True
    label: str = ""

    def __str__(self):
        s = str(self.value) if self.certified else f"≥ {self.value}"
        return f"{s} ({self.label})" if self.label else s

    @property
    def upper(self):
        return self.value if self.certified else float("inf")

    def to_json(self) -> dict:
        out = {"value": self.value, "certified": self.certified, "text": str(self)}
        if self.label:
            out["label"] = self.label
        return out


@dataclass
class Generator:
    label: str
    word: Word
    degree: object
    lead: LieElement | None


@dataclass
class Verdict:
    j: int
    status: str  # certified-true | certified-false | undetermined-at-cutoff
    witness_degree: int | None = None
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"j": self.j, "claim": f"O ∩ L_{self.j + 1} ⊆ [O, π₁]", "status": self.status}
        if self.witness is not None:
            out["witness_degree"] = self.witness_degree
            out["witness"] = self.witness
        return out


@dataclass
class DepthReport:
    config: str
    c: int
    verdicts: list[Verdict]
    k: Bound
    n: Bound
    d: Bound
    monotone: bool
    algebra_dims: list[int]
    ideal_dims: list[int]
    commutator_dims: list[int]
    new_generator_degrees: list[int]
    witnesses: list[dict]
    dropped: list[dict]
    derived_witnesses: list[dict] = field(default_factory=list)
    qualifier: str = "rational"

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "class": self.c,
            "qualifier": self.qualifier,
            "k": self.k.to_json(),
            "n": self.n.to_json(),
            "d": self.d.to_json(),
            "verdicts": [v.to_json() for v in self.verdicts],
            "monotone": self.monotone,
            "dimensions": {
                "algebra": self.algebra_dims,
                "orbit_ideal": self.ideal_dims,
                "commutator_ideal": self.commutator_dims,
            },
            "new_generator_degrees": self.new_generator_degrees,
            "witnesses": self.witnesses,
            "derived_witnesses": self.derived_witnesses,
            "dropped_generators": self.dropped,
        }


# -- the graded computation --------------------------------------------------------


class PullbackIdeal:
    """Graded subspace of the ambient algebra given by a degree-one part plus
    the preimage of a quotient subspace in degrees >= 2."""

    def __init__(self, analysis: "OrbitAnalysis", degree_one: RowSpace, quotient: GradedSubspace):
        self.analysis = analysis
        self.basis = analysis.ambient
        self.degree_one = degree_one
        self.quotient = quotient
        self._explicit: GradedSubspace | None = None

    def dim(self, m: int) -> int:
        if m == 1:
            return self.degree_one.dim
        a = self.analysis
        return a.ambient.dimension(m) - a.quotient.dimension(m) + self.quotient.dim(m)

    def dims(self) -> list[int]:
        return [self.dim(m) for m in range(1, self.basis.c + 1)]

    def contains(self, x: LieElement) -> bool:
        if x.basis != self.basis:
            raise ValueError("element from a different algebra")
        for m, comp in x.components().items():
            if m == 1:
                if not self.degree_one.contains(comp.coords):
                    return False
            elif not self.quotient.contains(self.analysis.project(comp)):
                return False
        return True

    __contains__ = contains

    def issubspace(self, other: "PullbackIdeal") -> bool:
        return self.degree_one.issubspace(other.degree_one) and self.quotient.issubspace(other.quotient)

    def explicit(self) -> GradedSubspace:
        """Materialize per-degree bases in ambient Hall coordinates."""
        if self._explicit is None:
            a = self.analysis
            out = GradedSubspace(self.basis)
            out.spaces[1] = self.degree_one.copy()
            for m in range(2, self.basis.c + 1):
                cols = {w: a.project_word(w).coords for w in self.basis.words(m)}
                s = RowSpace(kernel(cols))
                for row in self.quotient.space(m).basis():
                    s.add(a.lift(LieElement(a.quotient, row)).coords)
                out.spaces[m] = s
            self._explicit = out
        return self._explicit

    def basis_elements(self, m: int) -> list[LieElement]:
        return self.explicit().basis_elements(m)

    def to_json(self) -> dict:
        return self.explicit().to_json()


class OrbitAnalysis:
    def __init__(self, cfg: Configuration, c: int):
        if c < 2:
            raise ValueError("class cutoff must be >= 2")
        self.cfg = cfg
        self.c = c
        self.ambient = HallBasis(cfg.alphabet.names, c)
        self.generators: list[Generator] = []
        for label, w in cfg.orbit_words(c):
            deg = lcs_degree(w, c)
            lead = log_leading(w, c, self.ambient) if isinstance(deg, int) else None
            self.generators.append(Generator(label, w, deg, lead))
        u = RowSpace(g.lead.coords for g in self.generators if g.degree == 1)
        self.U = u
        pivots = {w[0] for w in u.pivots()}
        free = [i for i in range(self.ambient.rank) if i not in pivots]
        qindex = {i: n for n, i in enumerate(free)}
        self.quotient = HallBasis([self.ambient.names[i] for i in free], c)
        self.letter_map: list[dict[int, Fraction]] = []
        for i in range(self.ambient.rank):
            if i in qindex:
                self.letter_map.append({qindex[i]: Fraction(1)})
            else:
                row = u.rows[(i,)]
                self.letter_map.append({qindex[j[0]]: -x for j, x in row.items() if j[0] != i})
        self.lift_map = {qindex[i]: i for i in free}
        self._proj_cache: dict = {}
        high = [self.project(g.lead) for g in self.generators if isinstance(g.degree, int) and g.degree >= 2]
        self.K = ideal_closure(high, self.quotient)
        self.C = GradedSubspace(self.quotient)
        for m in range(2, c + 1):
            self.C.spaces[m] = bracket_with_generators(self.quotient, self.K.space(m - 1), m)

    # projection g -> f = g / (U)
    def project_word(self, w) -> LieElement:
        out = self._proj_cache.get(w)
        if out is None:
            poly: dict = {}
            for word, coef in self.ambient.expansion(w).items():
                terms = {(): Fraction(coef)}
                for letter in word:
                    nxt: dict = {}
                    for t, x in terms.items():
                        for j, y in self.letter_map[letter].items():
                            k = t + (j,)
                            nxt[k] = nxt.get(k, 0) + x * y
                    terms = nxt
                axpy(poly, 1, terms)
            out = LieElement(self.quotient, self.quotient.from_nc(poly))
            self._proj_cache[w] = out
        return out

    def project(self, x: LieElement) -> LieElement:
        coords: dict = {}
        for w, c in x.coords.items():
            axpy(coords, c, self.project_word(w).coords)
        return LieElement(self.quotient, coords)

    def lift(self, y: LieElement) -> LieElement:
        """Section of the projection: rename quotient letters to ambient ones."""
        poly = self.quotient.to_nc(y.coords)
        lifted = {tuple(self.lift_map[i] for i in w): x for w, x in poly.items()}
        return LieElement(self.ambient, self.ambient.from_nc(lifted))

    def orbit_ideal(self) -> PullbackIdeal:
        return PullbackIdeal(self, self.U, self.K)

    def commutator_ideal(self) -> PullbackIdeal:
        return PullbackIdeal(self, RowSpace(), self.C)

    def _witness(self, g: Generator) -> dict:
        return {"generator": g.label, "word": str(g.word), "degree": g.degree,
                "leading_term": str(g.lead), "hall": g.lead.to_json()}

    def new_generators(self) -> dict[int, Generator]:
        """Degree m -> an orbit generator of degree m outside [I, g]_m."""
        out = {}
        for g in self.generators:
            if not isinstance(g.degree, int) or g.degree in out:
                continue
            m = g.degree
            if m == 1:
                out[1] = g
            elif self.K.dim(m) > self.C.dim(m) and not self.C.contains(self.project(g.lead)):
                out[m] = g
        return dict(sorted(out.items()))

    def depth(self) -> tuple[list[Verdict], Bound, bool, dict]:
        new = self.new_generators()
        verdicts = []
        for j in range(1, self.c):
            failing = [m for m in new if m > j]
            if failing:
                m = failing[0]
                verdicts.append(Verdict(j, "certified-false", m, self._witness(new[m])))
            else:
                verdicts.append(Verdict(j, "certified-true"))
        verdicts.append(Verdict(self.c, "undetermined-at-cutoff"))
        tested = [v for v in verdicts if v.status != "undetermined-at-cutoff"]
        passing = [v.j for v in tested if v.status == "certified-true"]
        monotone = all(v.status == "certified-true" for v in tested if passing and v.j >= passing[0])
        failing_j = [v.j for v in tested if v.status == "certified-false"]
        if passing and monotone:
            k = Bound(passing[0])
        elif passing:
            k = Bound(max(failing_j) + 1)
        else:
            k = Bound(max(failing_j) + 1, certified=False)
        return verdicts, k, monotone, new

    def nilpotence(self) -> Bound:
        if self.ambient.rank == 0:
            return Bound(1, label="trivial group")
        for m in range(2, self.c + 1):
            if self.K.is_full(m):
                return Bound(m - 1)
        return Bound(self.c, certified=False)

    def derived_series(self, n: Bound) -> tuple[Bound, list[dict]]:
        """Derived length of g / I_{>=2}, computed in f / K."""
        if self.ambient.rank == 0:
            return Bound(0, label="trivial group"), []
        f, K = self.quotient, self.K
        c = self.c
        current = GradedSubspace.full(f, range(2, c + 1))  # first derived term, over K
        j = 1
        last_nonzero = 0
        witnesses = []
        while True:
            if 2 ** j > c and not n.certified:
                break
            nz = next((m for m in range(2, c + 1) if current.dim(m) > K.dim(m)), None)
            if nz is None:
                if n.certified:
                    return Bound(j), witnesses
                break
            last_nonzero = j
            rep = next(r for r in current.space(nz).basis() if not K.space(nz).contains(r))
            witnesses.append({"j": j, "degree": nz, "element": str(self.lift(LieElement(f, rep)))})
            current = self._next_derived(current)
            j += 1
        return Bound(last_nonzero + 1, certified=False), witnesses

    def _next_derived(self, D: GradedSubspace) -> GradedSubspace:
        f, K = self.quotient, self.K
        reps = {}
        for a in range(1, self.c + 1):
            s = K.space(a).copy()
            reps[a] = [LieElement(f, r) for r in D.space(a).basis() if s.add(r)]
        out = GradedSubspace(f)
        for m in range(1, self.c + 1):
            s = K.space(m).copy()
            for a in range(1, m // 2 + 1):
                b = m - a
                for x in reps.get(a, []):
                    for y in reps.get(b, []):
                        if a == b and x is y:
                            continue
                        s.add(x.bracket(y).coords)
                        if s.dim == f.dimension(m):
                            break
            out.spaces[m] = s
        return out

    def report(self) -> DepthReport:
        verdicts, k, monotone, new = self.depth()
        n = self.nilpotence()
        d, dw = self.derived_series(n)
        ideal = self.orbit_ideal()
        comm = self.commutator_ideal()
        dropped = [{"generator": g.label, "word": str(g.word),
                    "reason": g.degree.value if isinstance(g.degree, LCS) else str(g.degree)}
                   for g in self.generators if not isinstance(g.degree, int)]
        return DepthReport(
            config=self.cfg.name,
            c=self.c,
            verdicts=verdicts,
            k=k,
            n=n,
            d=d,
            monotone=monotone,
            algebra_dims=self.ambient.degree_sizes(),
            ideal_dims=ideal.dims(),
            commutator_dims=comm.dims(),
            new_generator_degrees=list(new),
            witnesses=[{"degree": m, **self._witness(g)} for m, g in new.items()],
            dropped=dropped,
            derived_witnesses=dw,
        )


def orbit_ideal(cfg: Configuration, c: int) -> PullbackIdeal:
    return OrbitAnalysis(cfg, c).orbit_ideal()


def commutator_ideal(cfg: Configuration, c: int) -> PullbackIdeal:
    return OrbitAnalysis(cfg, c).commutator_ideal()


def orbit_depth(cfg: Configuration, c: int) -> DepthReport:
    return OrbitAnalysis(cfg, c).report()


def nilpotence_class(cfg: Configuration, c: int) -> Bound:
    return OrbitAnalysis(cfg, c).nilpotence()


def derived_length(cfg: Configuration, c: int) -> Bound:
    a = OrbitAnalysis(cfg, c)
    return a.derived_series(a.nilpotence())[0]


def direct_orbit_ideal(cfg: Configuration, c: int) -> GradedSubspace:
    """Orbit ideal by saturation in the full ambient algebra (no reduction)."""
    basis = HallBasis(cfg.alphabet.names, c)
    leads = []
    for _, w in cfg.orbit_words(c):
        if isinstance(lcs_degree(w, c), int):
            leads.append(log_leading(w, c, basis))
    return ideal_closure(leads, basis)


@dataclass
class InequalityCheck:
    ok: bool
    explanation: list[str]
    ell_bound: int | None

    def to_json(self) -> dict:
        return {"ok": self.ok, "explanation": self.explanation,
                "melnikov_length_bound": self.ell_bound if self.ell_bound is not None else "unbounded at cutoff"}


def _compare(name_a: str, a: Bound, name_b: str, b: Bound, shift: int = 0) -> str:
    rhs = f"{name_b}+{shift}" if shift else name_b
    lo_a = a.value
    hi_b = b.upper + shift
    if lo_a > hi_b:
        raise InvariantViolation(f"{name_a} = {a} violates {name_a} <= {rhs} with {name_b} = {b}")
    if a.certified and b.certified:
        return f"{name_a} = {a.value} <= {rhs} = {b.value + shift}: holds"
    if a.certified and a.value <= b.value + shift:
        return f"{name_a} = {a.value} <= {rhs} (>= {b.value + shift}): holds"
    return f"{name_a} {a} vs {rhs} with {name_b} {b}: not decided at cutoff"


def verify_inequalities(r: DepthReport) -> InequalityCheck:
    """k <= n + 1 and d <= n where decidable; ell <= k as a reported bound."""
    lines = [_compare("k", r.k, "n", r.n, 1), _compare("d", r.d, "n", r.n)]
    ell = r.k.value if r.k.certified else None
    lines.append(f"Melnikov length bound: l <= {ell}" if ell is not None else "Melnikov length bound: none at cutoff")
    return InequalityCheck(True, lines, ell)
