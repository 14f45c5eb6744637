import random

import pytest
from hypothesis import given, strategies as st

from mol.freegroup import (
    Alphabet,
    AlphabetMismatch,
    Word,
    WordSyntaxError,
    commutator,
    free_reduce,
    iterated_commutator,
    parse,
)

AB = Alphabet(["a", "b", "c"])


def letters(*xs):
    return Word(AB, xs)


words = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=12).map(lambda xs: Word(AB, tuple(xs)))


def test_free_reduction_cancels_adjacent_inverses():
    assert free_reduce([1, 2, -2, -1, 3]) == (3,)
    assert letters(1, -1).is_identity()


def test_commutator_is_u_v_uinv_vinv():
    a, b, _ = AB.gens()
    assert commutator(a, b) == a * b * a.inverse() * b.inverse()
    assert commutator(a, a).is_identity()


def test_parse_basic_forms():
    a, b, c = AB.gens()
    assert parse("a b^-1 c^2", AB) == a * b.inverse() * c * c
    assert parse("[a, b]", AB) == commutator(a, b)
    assert parse("[a b, c]", AB) == commutator(a * b, c)
    assert parse("1", AB).is_identity()
    assert parse("", AB).is_identity()
    assert parse("(a b)^-2", AB) == (a * b) ** -2


def test_ad_notation():
    a, b, _ = AB.gens()
    assert parse("ad(a)^0(b)", AB) == b
    assert parse("ad(a)(b)", AB) == commutator(a, b)
    assert parse("ad(a)^2(b)", AB) == commutator(a, commutator(a, b))
    assert parse("ad(a)^m(b)", AB, params={"m": 3}) == iterated_commutator(a, b, 3)


def test_bindings_substitute_whole_words():
    g = parse("a b", AB)
    assert parse("[g, c]", AB, bindings={"g": g}) == commutator(g, AB.gen("c"))


@pytest.mark.parametrize(
    "text, pos",
    [("a $", 2), ("[a, b", 5), ("x", 0), ("a^", 2), ("ad(a)^m(b)", 6), ("2", 0)],
)
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(WordSyntaxError) as info:
        parse(text, AB)
    assert info.value.pos == pos


def test_alphabet_validation():
    with pytest.raises(ValueError):
        Alphabet(["a", "a"])
    with pytest.raises(ValueError):
        Alphabet(["ad"])
    with pytest.raises(ValueError):
        Alphabet(["1x"])


def test_mixing_alphabets_is_rejected():
    other = Alphabet(["a", "b"])
    with pytest.raises(AlphabetMismatch):
        AB.gen("a") * other.gen("a")


def test_str_compresses_runs():
    assert str(letters(1, 1, -2)) == "a^2 b^-1"
    assert str(AB.identity()) == "1"


@given(words)
def test_str_round_trips(w):
    assert parse(str(w), AB) == w


@given(words, words, words)
def test_group_axioms(u, v, w):
    assert (u * v) * w == u * (v * w)
    assert (u * u.inverse()).is_identity()
    assert (u * v).inverse() == v.inverse() * u.inverse()


@given(words)
def test_words_are_reduced(w):
    assert all(x != -y for x, y in zip(w.letters, w.letters[1:]))


def test_random_word_is_deterministic_per_seed():
    from mol.freegroup import random_word

    assert random_word(AB, 8, random.Random(3)) == random_word(AB, 8, random.Random(3))
