"""Words in a finitely generated free group.

Word expressions use the grammar below (whitespace separates letters)::

    expr     = { power } ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] ( integer | name ) ;
    atom     = name | "1" | "(" expr ")" | "[" expr "," expr "]"
             | "ad" "(" expr ")" [ "^" exponent ] "(" expr ")" ;
    name     = letter { letter | digit | "_" } ;

``[u, v]`` is ``u v u^-1 v^-1`` and ``ad(a)^m(b)`` is the m-fold iterated
commutator ``[a, [a, ..., [a, b]]]`` (``ad(a)^0(b) = b``).  ``1`` and the
empty string denote the identity.  Names in the exponent position are looked
up in ``params``; names in letter position may be bound to whole words through
``bindings``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class WordSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


class AlphabetMismatch(ValueError):
    pass


_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Alphabet:
    """Ordered tuple of generator names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for name in names:
            if not isinstance(name, str) or not _NAME.match(name):
                raise ValueError(f"invalid generator name {name!r}")
            if name == "ad":
                raise ValueError("'ad' is reserved")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Alphabet({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def identity(self) -> "Word":
        return Word(self, ())

    def gen(self, name: str) -> "Word":
        return Word(self, (self.index(name) + 1,))

    def gens(self) -> list["Word"]:
        return [Word(self, (i + 1,)) for i in range(len(self))]


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """Freely reduced word.

    ``letters`` holds signed 1-based generator indices: ``+i`` is the i-th
    generator of the alphabet and ``-i`` its inverse.
    """

    alphabet: Alphabet
    letters: tuple[int, ...]

    def __post_init__(self):
        n = len(self.alphabet)
        for x in self.letters:
            if x == 0 or abs(x) > n:
                raise ValueError(f"letter {x} out of range for {self.alphabet}")
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def from_pairs(cls, alphabet: Alphabet, pairs: Iterable[tuple[int, int]]) -> "Word":
        """Build from (0-based generator index, sign) pairs."""
        return cls(alphabet, tuple((i + 1) * s for i, s in pairs))

    def pairs(self) -> list[tuple[int, int]]:
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in self.letters]

    def __len__(self):
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def _check(self, other: "Word"):
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch(f"{self.alphabet} vs {other.alphabet}")

    def __mul__(self, other: "Word") -> "Word":
        self._check(other)
        return Word(self.alphabet, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(self.alphabet, tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word(self.alphabet, base.letters * abs(n))

    def __str__(self):
        if not self.letters:
            return "1"
        out = []
        i = 0
        while i < len(self.letters):
            x = self.letters[i]
            j = i
            while j < len(self.letters) and self.letters[j] == x:
                j += 1
            run = (j - i) * (1 if x > 0 else -1)
            name = self.alphabet.names[abs(x) - 1]
            out.append(name if run == 1 else f"{name}^{run}")
            i = j
        return " ".join(out)

    def __repr__(self):
        return f"Word({str(self)!r})"


def multiply(u: Word, v: Word) -> Word:
    return u * v


def invert(u: Word) -> Word:
    return u.inverse()


def commutator(u: Word, v: Word) -> Word:
    """``u v u^-1 v^-1``."""
    u._check(v)
    return Word(u.alphabet, u.letters + v.letters + u.inverse().letters + v.inverse().letters)


def iterated_commutator(a: Word, b: Word, m: int) -> Word:
    """``ad(a)^m(b)``."""
    if m < 0:
        raise ValueError("ad exponent must be >= 0")
    for _ in range(m):
        b = commutator(a, b)
    return b


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>[()\[\],^\-]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            skipped = len(text[pos:]) - len(text[pos:].lstrip())
            raise WordSyntaxError("unexpected character", text, pos + skipped)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _WordParser:
    def __init__(self, text, alphabet, params, bindings):
        self.text = text
        self.alphabet = alphabet
        self.params = params
        self.bindings = bindings
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.advance()
        if tok[1] != value or tok[0] == "end":
            raise WordSyntaxError(f"expected {value!r}", self.text, tok[2])
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return WordSyntaxError(message, self.text, tok[2])

    def parse(self) -> Word:
        w = self.expr()
        if self.peek()[0] != "end":
            raise self.error("unexpected token")
        return w

    def expr(self) -> Word:
        w = self.alphabet.identity()
        while True:
            kind, value, _ = self.peek()
            if kind == "end" or value in (")", "]", ","):
                return w
            w = w * self.power()

    def power(self) -> Word:
        w = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            w = w ** self.exponent()
        return w

    def exponent(self) -> int:
        sign = 1
        if self.peek()[1] == "-":
            self.advance()
            sign = -1
        kind, value, pos = self.advance()
        if kind == "int":
            return sign * int(value)
        if kind == "name":
            if value not in self.params:
                raise WordSyntaxError(f"unbound parameter {value!r}", self.text, pos)
            return sign * int(self.params[value])
        raise WordSyntaxError("expected exponent", self.text, pos)

    def atom(self) -> Word:
        tok = self.advance()
        kind, value, pos = tok
        if kind == "int":
            if value != "1":
                raise WordSyntaxError("only '1' may appear as a literal", self.text, pos)
            return self.alphabet.identity()
        if kind == "name":
            if value == "ad" and self.peek()[1] == "(":
                return self.ad()
            if value in self.bindings:
                return self.bindings[value]
            try:
                return self.alphabet.gen(value)
            except KeyError:
                raise WordSyntaxError(f"unknown generator {value!r}", self.text, pos) from None
        if value == "(":
            w = self.expr()
            self.expect(")")
            return w
        if value == "[":
            u = self.expr()
            self.expect(",")
            v = self.expr()
            self.expect("]")
            return commutator(u, v)
        raise WordSyntaxError("unexpected token", self.text, pos)

    def ad(self) -> Word:
        self.expect("(")
        a = self.expr()
        self.expect(")")
        m = 1
        if self.peek()[1] == "^":
            self.advance()
            tok = self.peek()
            m = self.exponent()
            if m < 0:
                raise self.error("ad exponent must be >= 0", tok)
        self.expect("(")
        b = self.expr()
        self.expect(")")
        return iterated_commutator(a, b, m)


def parse(
    text: str,
    alphabet: Alphabet | Sequence[str],
    params: Mapping[str, int] | None = None,
    bindings: Mapping[str, Word] | None = None,
) -> Word:
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet(alphabet)
    bindings = dict(bindings or {})
    for name, w in bindings.items():
        if w.alphabet != alphabet:
            raise AlphabetMismatch(f"binding {name!r} uses a different alphabet")
    return _WordParser(text, alphabet, dict(params or {}), bindings).parse()


def random_word(alphabet: Alphabet, length: int, rng: random.Random) -> Word:
    n = len(alphabet)
    return Word(alphabet, tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(length)))
