import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfgkit.cocycle import evaluate, identity, shift_element
from tfgkit.errors import DomainMismatch, UsageError
from tfgkit.roots import (RootSubshift, WreathWord, check_faithful, check_wreath_law,
                          default_generators, embed_word, embed_wreath_Sk, sqrt_shift)
from tfgkit.symbolic import EPC, full_shift, golden_mean

X = full_shift(2)
R2 = sqrt_shift(X, 2)


def test_root_language():
    assert R2.admissible([0, 2, 1, 2]) and R2.admissible([2, 1, 2, 0])
    assert not R2.admissible([0, 1]) and not R2.admissible([2, 2])
    assert R2.admissible([2])
    assert R2.count_words(4) == len(R2.words(4)) == 8
    assert len(R2.periodic_words(3)) == 0


def test_root_of_sft():
    r = RootSubshift(golden_mean(), 2)
    assert not r.admissible([1, 2, 1])
    assert r.admissible([1, 2, 0])


def test_spread_places_symbols_on_one_class():
    y = EPC((0,), (1, 1), (0,))
    z = R2.spread(y, 1)
    assert z.symbol_at(1) == 1 and z.symbol_at(3) == 1 and z.symbol_at(0) == 2


def test_copy_swap_and_shift_values():
    swap = embed_wreath_Sk(R2, (identity(X), identity(X)), (1, 0))
    x = R2.spread(EPC((0,)))
    assert evaluate(swap, x) == 1 and evaluate(swap, x.shift(1)) == -1
    sig = embed_wreath_Sk(R2, (shift_element(X), identity(X)), (0, 1))
    assert evaluate(sig, x) == 2 and evaluate(sig, x.shift(1)) == 0


def test_bad_inputs():
    with pytest.raises(UsageError):
        embed_wreath_Sk(R2, (identity(X),), (0,))
    with pytest.raises(UsageError):
        embed_wreath_Sk(R2, (identity(X), identity(X)), (0, 0))
    with pytest.raises(DomainMismatch):
        embed_wreath_Sk(R2, (identity(full_shift(3)), identity(X)), (0, 1))


def test_abstract_product_convention():
    a, b = default_generators(R2)
    ab = a * b
    assert ab.rho == (1, 0)
    x = R2.spread(EPC((0,), (1, 0, 1), (0,)))
    direct = embed_word(R2, ab)
    assert embed_word(R2, a)(embed_word(R2, b)(x)) == direct(x)


@pytest.mark.parametrize("k", [2, 3])
def test_wreath_law(k):
    r = check_wreath_law(sqrt_shift(X, k), length=2, period_bound=8)
    assert r["failures"] == []


@pytest.mark.parametrize("k", [2, 3])
def test_faithful(k):
    r = check_faithful(sqrt_shift(X, k), length=2)
    assert r["clashes"] == [] and r["elements"] > 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_action_preserves_language(seed):
    rng = np.random.default_rng(seed)
    a, b = (embed_word(R2, g) for g in default_generators(R2))
    x = R2.random_epc(rng)
    for g in (a, b):
        y = g(x)
        assert R2.contains(y, 12)
        assert y.shift(0) == g(x)
