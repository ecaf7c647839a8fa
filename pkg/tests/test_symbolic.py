import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfgkit.errors import CodebookOverflow, InvalidCodebook, UsageError
from tfgkit.symbolic import (EPC, Alphabet, CanonicalCoding, VertexShift, admissible,
                             check_mutually_unbordered, enumerate_periodic, full_shift,
                             generate_codebook, golden_mean, parse_configuration)

BIN = Alphabet(2)


def test_symbol_at_examples():
    assert EPC((0,)).symbol_at(7) == 0
    x = parse_configuration("(0)* . 01 (0)*", BIN)
    assert x.symbol_at(1) == 1
    assert parse_configuration("(01)* . (01)*", BIN).symbol_at(-3) == 1


def test_shift_examples():
    x = parse_configuration("(0)* . 1 (0)*", BIN)
    assert x.shift(0) == x
    assert x.shift(1).symbol_at(-1) == 1
    p = EPC.periodic((0, 1))
    assert p.shift(2) == p
    assert p.shift(1) != p


def test_literal_round_trip():
    for text in ["(0)* 01 . (0)*", "(01)* 1 . 0 (110)*", "(1)* . (0)*"]:
        x = parse_configuration(text, BIN)
        assert parse_configuration(x.to_literal(BIN), BIN) == x


def test_malformed_literal():
    with pytest.raises(UsageError):
        parse_configuration("0 . 1", BIN)


def test_alphabet_needs_two_symbols():
    with pytest.raises(UsageError):
        Alphabet(1)


def test_unbordered_examples():
    assert check_mutually_unbordered([BIN.parse(w) for w in ["1100010", "11000010", "110000010"]])[0]
    q = Alphabet(4)
    assert check_mutually_unbordered([q.parse("3210"), q.parse("3220")])[0]
    ok, t = check_mutually_unbordered([BIN.parse("01"), BIN.parse("10")])
    assert not ok and t == (1,)


def test_empty_word_rejected():
    with pytest.raises(InvalidCodebook):
        check_mutually_unbordered([(), (1, 0)])


def test_codebook_round_trip_and_shape():
    key = (1, 1, 3, (0, 1, 1, 1))
    book = generate_codebook(BIN, [key, (0, 1, 1, (0, 0))])
    w = book[key]
    assert w[:2] == (1, 1) and w[-1] == 0
    assert all(w[i:i + 2] != (1, 1) for i in range(1, len(w) - 1))
    coding = CanonicalCoding([0, 1], 3, 2)
    assert coding.decode_at(coding.encode(key), 0) == (key, len(coding.encode(key)))
    assert len(book[(0, 1, 1, (0, 0))]) >= 2


def test_codebook_overflow():
    keys = [(0, 1, 1, (a, b)) for a in range(2) for b in range(2)]
    with pytest.raises(CodebookOverflow):
        generate_codebook(BIN, keys, max_length=4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 4), st.integers(1, 4),
                          st.integers(0, 255)), min_size=1, max_size=6, unique=True))
def test_generated_books_are_unbordered(raw):
    keys = []
    for u, a, b, bits in raw:
        v = tuple((bits >> i) & 1 for i in range(a + b))
        keys.append((u, a, b, v))
    keys = list(dict.fromkeys(keys))
    book = generate_codebook(BIN, keys)
    assert check_mutually_unbordered(list(book.entries.values()))[0]
    coding = CanonicalCoding(sorted({k[0] for k in keys}), 4, 2)
    for k in keys:
        word = coding.encode(k)
        # decoding inside arbitrary context recovers the key
        ctx = (0, 1, 0) + word + (1, 1, 1)
        assert coding.decode_at(ctx, 3) == (k, len(word))


def test_admissible_examples():
    g = golden_mean()
    assert admissible(g, (0, 1, 0, 1))
    assert not admissible(g, (0, 1, 1))
    assert admissible(g, ())


def test_vertex_shift_pruned():
    # symbol 2 has no successor and is pruned
    v = VertexShift(Alphabet(3), ((1, 1, 1), (1, 0, 0), (0, 0, 0)))
    assert v.live_symbols == [0, 1]


def test_periodic_counts():
    f = full_shift(3)
    g = golden_mean()
    m = g.matrix.astype(int)
    for p in range(1, 7):
        assert len(enumerate_periodic(f, p)) == 3 ** p
        assert len(enumerate_periodic(g, p)) == np.trace(np.linalg.matrix_power(m, p))
        direct = sum(1 for w in itertools.product((0, 1), repeat=p)
                     if all(not (w[i] == 1 and w[(i + 1) % p] == 1) for i in range(p)))
        assert len(enumerate_periodic(g, p)) == direct


epcs = st.builds(
    lambda l, c, r, s: EPC(l, c, r, s),
    st.lists(st.integers(0, 1), min_size=1, max_size=4),
    st.lists(st.integers(0, 1), max_size=8),
    st.lists(st.integers(0, 1), min_size=1, max_size=4),
    st.integers(-6, 6))


@settings(max_examples=200, deadline=None)
@given(epcs, st.integers(-20, 20))
def test_shift_consistency(x, k):
    y = x.shift(k)
    for i in range(-15, 15):
        assert y.symbol_at(i) == x.symbol_at(i + k)
    assert y.shift(-k) == x


@settings(max_examples=200, deadline=None)
@given(epcs, epcs)
def test_normalized_equality_matches_pointwise(x, y):
    lo = min(x.start, y.start) - 40
    hi = max(x.end, y.end) + 40
    same = all(x.symbol_at(i) == y.symbol_at(i) for i in range(lo, hi))
    assert (x == y) == same
