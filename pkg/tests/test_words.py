import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assgp.words import (
    E,
    AlphabetRegistry,
    Word,
    WordError,
    cyclic_member,
    cyclic_root,
    hom_extend,
    inv,
    lett,
    mul,
    power,
    random_word,
    reduce_word,
    retract,
    split_cancellation,
    words_of_length,
    words_up_to,
)

x, X = 1, -1  # generator 0 and its inverse
y, Y = 2, -2


def W(*letters):
    return Word(letters)


def naive_reduce(letters):
    """Repeated left-most cancellation until nothing changes; independent of the stack pass."""
    w = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] == -w[i + 1]:
                del w[i : i + 2]
                changed = True
                break
    return tuple(w)


def brute_split(v, w):
    """Try every suffix/prefix pair and keep the longest valid cancellation."""
    best = None
    for c in range(min(len(v), len(w)) + 1):
        vs, wp = v[len(v) - c :], w[:c]
        if tuple(-a for a in reversed(vs)) != tuple(wp):
            continue
        rest = v[: len(v) - c] + w[c:]
        if naive_reduce(rest) == tuple(rest):
            best = (v[: len(v) - c], vs, wp, w[c:])
    return best


words_st = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=12).map(reduce_word)


class TestReduce:
    def test_full_cancellation(self):
        assert reduce_word([x, X]) == E

    def test_stack_reduction(self):
        assert reduce_word([x, Y, y, x]) == W(x, x)

    def test_empty(self):
        assert reduce_word([]) == E

    def test_rejects_zero(self):
        with pytest.raises(WordError):
            reduce_word([0])

    @given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30))
    def test_matches_naive(self, raw):
        assert tuple(reduce_word(raw)) == naive_reduce(raw)


class TestMulInv:
    def test_mul_example(self):
        assert mul(W(x, y), W(Y, x)) == W(x, x)

    def test_inverse_law(self):
        w = W(x, y, X, y)
        assert mul(w, inv(w)) == E

    def test_identity_law(self):
        w = W(y, x)
        assert mul(E, w) == w

    def test_inv_example(self):
        assert inv(W(x, Y)) == W(y, X)
        assert inv(E) == E

    @given(words_st)
    def test_double_inverse(self, w):
        assert inv(inv(w)) == w

    @given(words_st, words_st)
    def test_lett_of_product(self, v, w):
        assert lett(mul(v, w)) <= lett(v) | lett(w)


class TestSplit:
    def test_partial(self):
        s = split_cancellation(W(x, y), W(Y, x))
        assert (s.v_prefix, s.v_suffix, s.w_prefix, s.w_suffix) == (W(x), W(y), W(Y), W(x))

    def test_none(self):
        s = split_cancellation(W(x), W(y))
        assert (s.v_prefix, s.v_suffix, s.w_prefix, s.w_suffix) == (W(x), E, E, W(y))

    def test_total(self):
        s = split_cancellation(W(X, Y), W(y, x))
        assert (s.v_prefix, s.v_suffix, s.w_prefix, s.w_suffix) == (E, W(X, Y), W(y, x), E)

    def test_brute_force_short_words(self):
        words = list(words_up_to([0, 1], 4))
        for v, w in itertools.product(words, repeat=2):
            s = split_cancellation(v, w)
            assert (s.v_prefix, s.v_suffix, s.w_prefix, s.w_suffix) == brute_split(v, w)


class TestLettAndRoots:
    def test_lett(self):
        assert lett(W(x, Y, x)) == {0, 1}
        assert lett(E) == frozenset()

    @pytest.mark.parametrize("c,u,d", [((x, y, X), (x,), (y,)), ((y,), (), (y,)), ((x, y, y, X), (x,), (y, y))])
    def test_cyclic_root(self, c, u, d):
        r = cyclic_root(Word(c))
        assert (r.conjugator, r.core) == (Word(u), Word(d))

    def test_cyclic_member_examples(self):
        assert cyclic_member(W(y, y, y, y, y), W(y)) == 5
        assert cyclic_member(W(x, y, y, X), W(x, y, X)) == 2
        assert cyclic_member(W(x), W(y)) is None

    @settings(max_examples=200)
    @given(words_st.filter(bool), st.integers(-6, 6))
    def test_cyclic_member_of_powers(self, c, q):
        h = reduce_word(list(c) * q if q >= 0 else list(inv(c)) * -q)
        got = cyclic_member(h, c)
        assert got is not None and power(c, got) == h

    @given(words_st.filter(bool), words_st)
    def test_cyclic_member_sound(self, c, h):
        q = cyclic_member(h, c)
        if q is not None:
            assert naive_reduce(list(c) * q if q >= 0 else list(inv(c)) * -q) == tuple(h)


class TestHomAndRetraction:
    def test_hom_example(self):
        f = hom_extend({0: W(x), 1: E})
        assert f(W(x, y, x)) == W(x, x)

    def test_identity_assignment(self):
        f = hom_extend({0: W(x), 1: W(y)})
        assert f(W(x, Y, X)) == W(x, Y, X)

    def test_support_projection(self):
        g0 = W(y, 3, x)  # x occurs once
        f = hom_extend({0: W(x), 1: E, 2: E})
        for q in range(-4, 5):
            assert f(power(g0, q)) == reduce_word([x] * q if q >= 0 else [X] * -q)

    def test_retraction(self):
        assert retract({0}, W(y)) == E
        assert retract({0}, W(x, y, x)) == W(x, x)
        assert retract({0, 1}, W(x, Y, x)) == W(x, Y, x)


class TestEnumeration:
    def test_counts(self):
        # 2k(2k-1)^(L-1) reduced words of length L over k generators
        for length in range(1, 5):
            assert len(list(words_of_length([0, 1], length))) == 4 * 3 ** (length - 1)

    def test_length_lex_and_reduced(self):
        ws = list(words_up_to([0, 1, 2], 3))
        assert ws[0] == E and ws[1] == W(x) and ws[2] == W(X)
        assert all(naive_reduce(w) == tuple(w) for w in ws)
        assert len(set(ws)) == len(ws)

    def test_random_word_reduced(self):
        rng = random.Random(3)
        for _ in range(100):
            w = random_word(rng, (0, 1, 2), 10)
            assert len(w) == 10 and naive_reduce(w) == tuple(w)


class TestRegistry:
    def test_parse_and_format(self):
        reg = AlphabetRegistry()
        reg.seed(2)
        w = reg.parse("x0 x1^-1 x0")
        assert w == W(x, Y, x)
        assert reg.format(w) == "x0 x1^-1 x0"
        assert reg.format(E) == "e"

    def test_parse_error_has_position(self):
        reg = AlphabetRegistry()
        reg.seed(1)
        with pytest.raises(WordError) as info:
            reg.parse("x0 ??")
        assert info.value.position == 3

    def test_unique_ids_and_names(self):
        reg = AlphabetRegistry()
        reg.seed(2)
        fresh = reg.fresh(3, stage=1)
        ids = [g.id for g in reg]
        names = [g.name for g in reg]
        assert len(set(ids)) == len(ids) == 5 and len(set(names)) == 5
        assert {g.id for g in fresh} == {2, 3, 4}
        with pytest.raises(WordError):
            reg.register("x0")

    def test_manifest_roundtrip(self):
        reg = AlphabetRegistry()
        reg.seed(2)
        reg.fresh(2, stage=3)
        again = AlphabetRegistry.from_manifest(reg.manifest())
        assert again.manifest() == reg.manifest()
