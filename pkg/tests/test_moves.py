import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfgkit.cocycle import (EqualityPolicy, evaluate, identity, pi01_table, shift_element,
                            verify_bijective)
from tfgkit.errors import EmptySupport, NonCommuting, NotFound
from tfgkit.lamplighter import FiniteAbelianGroup
from tfgkit.moves import (SearchPolicy, build_beta_cancel, cancellation_report, lamp_sum,
                          move_aithful_check, stabilized, subset_sum, unique_moves_check)
from tfgkit.sampling import random_epc
from tfgkit.symbolic import EPC, full_shift

X = full_shift(2)
ID = identity(X)
PI = verify_bijective(pi01_table(), label="pi01")
Z2 = FiniteAbelianGroup((2,))
EXACT = EqualityPolicy(samples=0)


def shifts(ks):
    return [shift_element(X, k) if k else ID for k in ks]


def test_unique_move_in_shift_family():
    fam = shifts([-2, -1, 0, 1, 2])
    cert = unique_moves_check(fam)
    assert cert.value not in cert.others
    assert evaluate(fam[cert.index], cert.config) == cert.value


def test_unique_move_for_pi01():
    cert = unique_moves_check([ID, PI])
    assert cert.config.period() == 2 and cert.value not in cert.others


def test_unique_move_trivial_and_empty():
    assert unique_moves_check([ID]).value == 0
    with pytest.raises(EmptySupport):
        unique_moves_check([])


def test_unique_move_not_found():
    with pytest.raises(NotFound):
        unique_moves_check([ID, identity(X)])


def test_move_aithful_finds_pi01():
    out = move_aithful_check([(PI, (1,))], Z2)
    assert any(out["sum"])
    with pytest.raises(EmptySupport):
        move_aithful_check([(PI, (0,))], Z2)


def test_beta_examples():
    sig = shift_element(X)
    b = build_beta_cancel([sig], (1,), Z2, EXACT)
    assert [a for _, a, _ in b.entries] == [(1,), (1,)]
    b = build_beta_cancel([ID], (1,), Z2, EXACT)
    assert not b.support
    s2 = shift_element(X)
    b = build_beta_cancel([sig, s2], (1,), FiniteAbelianGroup((5,)), EXACT)
    assert [a for _, a, _ in b.entries] == [(1,), (3,), (1,)] and b.exact


def test_non_commuting_rejected():
    with pytest.raises(NonCommuting):
        build_beta_cancel([PI, shift_element(X)], (1,), Z2, EXACT)


def test_cancellation_on_stabilized_configurations():
    fam = [PI, ID]
    b = build_beta_cancel(fam, (1,), Z2, EXACT)
    rng = np.random.default_rng(0)
    configs = [random_epc(X, rng) for _ in range(50)]
    rep = cancellation_report(b, fam, configs, rng)
    assert rep["checked"] > 0 and rep["nonzero"] == []


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=1, max_size=3), st.integers(0, 2 ** 31),
       st.integers(1, 4))
def test_grouped_sum_matches_subset_sum(ks, seed, h):
    group = FiniteAbelianGroup((5,))
    fam = shifts(ks)
    b = build_beta_cancel(fam, (h,), group, EXACT)
    rng = np.random.default_rng(seed)
    x = random_epc(X, rng)
    endos = group.endomorphisms()
    vals = [evaluate(g, x) for g, _ in b.support]
    gamma = {v: endos[int(rng.integers(0, len(endos)))] for v in set(vals) | {0}}
    grouped = lamp_sum(group, [a for _, a in b.support], vals, gamma)
    assert grouped == subset_sum(b, fam, x, gamma)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=1, max_size=3), st.integers(0, 2 ** 31))
def test_identity_in_family_cancels(ks, seed):
    # an element fixing every point pairs each subset with its partner
    fam = shifts(ks) + [ID]
    b = build_beta_cancel(fam, (1,), Z2, EXACT)
    assert not b.support
    x = random_epc(X, np.random.default_rng(seed))
    assert stabilized(fam, x)
