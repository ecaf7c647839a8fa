import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfgkit.belts import BeltConstruction, GraphProductSpec, parse_belts
from tfgkit.cocycle import EqualityPolicy, evaluate, is_identity, power
from tfgkit.errors import ConstraintUnsatisfiable, NotReduced, UsageError
from tfgkit.raag import (BeltSampler, allocate_cells, build_witness, check_reduced,
                         check_witness, free_reduced_words, verify_graph_product, witness_heads)
from tfgkit.simulation import trace_orbit
from tfgkit.symbolic import EPC, Alphabet, Codebook

BIN = Alphabet(2)
REFERENCE_ROW = "01110110001001100010110000101100000101110"

SMALL = GraphProductSpec.make([0, 1], [], slack=6)
FREE = BeltConstruction(SMALL)


def reference_book():
    return Codebook({(1, 1, 3, (0, 1, 1, 1)): BIN.parse("1100010"),
                     (1, 2, 2, (1, 1, 0, 0)): BIN.parse("11000010"),
                     (0, 2, 3, (1, 0, 1, 0, 1)): BIN.parse("110000010")}, BIN)


def test_reference_parse():
    spec = GraphProductSpec.make([0, 1], [])
    parse = parse_belts(spec, reference_book(), BIN.parse(REFERENCE_ROW))
    assert [b.start for b in parse.blocks] == [5, 13, 20, 28]
    assert parse.belts == [(1, [0]), (1, [1, 2]), (0, [3])]
    assert parse.shared == {28: {1: 0, 0: 1}}
    # the crossed-out bottom precell at 23 is replaced by the shared cell
    assert [p for p, _ in parse.cycles[1][1]] == [13, 20, 21, 28, 22, 16, 15, 14]
    assert [p for p, _ in parse.cycles[1][0]] == [5, 8, 7, 6]
    assert [p for p, _ in parse.cycles[0][0]] == [28, 29, 32, 31, 30]


def test_reference_parse_with_edge_has_no_shared_cell():
    spec = GraphProductSpec.make([0, 1], [(0, 1)])
    parse = parse_belts(spec, reference_book(), BIN.parse(REFERENCE_ROW))
    assert parse.shared == {}
    for b in parse.blocks:
        assert len(b.top) == b.key[1] and len(b.bottom) == b.key[2]


def test_zero_row_parses_empty():
    parse = parse_belts(SMALL, SMALL.coding(), np.zeros(60, dtype=np.uint8))
    assert parse.blocks == [] and parse.shared == {}


def test_single_block_is_a_two_cycle():
    f0 = FREE.step_element(0)
    w = FREE.encode((0, 1, 1, (0, 1)))
    x = EPC((0,), w, (0,))
    assert [evaluate(f0, x.shift(k)) for k in range(3)] == [1, -1, 0]
    assert evaluate(f0, EPC((0,))) == 0


def test_cycle_power_fixes_head():
    f0 = FREE.step_element(0)
    keys = [(0, 1, 2, (0, 0, 0)), (0, 2, 1, (0, 0, 0))]
    word = sum((FREE.encode(k) for k in keys), ())
    x = EPC((0,), word, (0,))
    orbit = trace_orbit(f0, x, 6).offsets
    assert orbit[-1] == 0 and len(set(orbit[:-1])) == 6


def test_free_generator_moves_two_cells():
    spec = GraphProductSpec.make([0], [], slack=6)
    c = BeltConstruction(spec)
    g = c.generator(0)
    x = EPC((0,), c.encode((0, 2, 2, (0, 1, 1, 0))), (0,))
    offsets = trace_orbit(g, x, 2).offsets
    # two simulated steps per application on a 4-cell cycle
    assert offsets[1] != 0 and offsets[2] == 0


def test_cyclic_node_has_order_two():
    spec = GraphProductSpec.make([0], [], {0: 2}, slack=6)
    g = BeltConstruction(spec).generator(0)
    assert is_identity(power(g, 2), EqualityPolicy(samples=0, period_bound=12)).equal


def test_allocation_examples():
    assert allocate_cells(4, 10, 1) == [(1, 5), (1, 5), (1, 5), (1, 1)]
    assert allocate_cells(2, 4, 1, variant="fallback") == [(1, 1), (1, 1)]
    # a tight cap forces the fallback
    assert allocate_cells(2, 4, 1, slack=4) == [(1, 1), (1, 1)]
    with pytest.raises(UsageError):
        allocate_cells(0, 4, 1)
    with pytest.raises(ConstraintUnsatisfiable):
        allocate_cells(2, 40, 1, slack=2)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 30), st.integers(2, 200), st.integers(1, 3))
def test_allocation_totals(half, p, c_u):
    d = 2 * half
    try:
        blocks, variant = allocate_cells(d, p, c_u, with_variant=True)
    except ConstraintUnsatisfiable:
        return
    assert all(1 <= x <= 100 * c_u for pair in blocks for x in pair)
    assert sum(a for a, _ in blocks) == d
    cycle = 2 * p if variant == "main" else p
    assert sum(b for _, b in blocks) == cycle - d
    if variant == "fallback":
        with pytest.raises(ConstraintUnsatisfiable):
            allocate_cells(d, p, c_u, variant="main")


def test_reduction_rules():
    edge = GraphProductSpec.make([0, 1], [(0, 1)])
    with pytest.raises(NotReduced):
        check_reduced(edge, [(0, -1), (1, -1), (0, 1), (1, 1)])
    with pytest.raises(NotReduced):
        check_reduced(SMALL, [(0, 0)])
    cyc = GraphProductSpec.make([0, 1], [], {0: 3})
    with pytest.raises(NotReduced):
        check_reduced(cyc, [(0, 3)])
    assert check_reduced(SMALL, [(0, 1), (1, 1), (0, 1)])


def test_witness_for_single_generator():
    wit = build_witness(FREE, [(0, 1)])
    assert abs(wit.displacement) >= 2
    assert witness_heads(FREE, wit, wit.cylinder()) == wit.heads


def test_non_edge_commutator_witness():
    wit = build_witness(FREE, [(0, -1), (1, -1), (0, 1), (1, 1)])
    ok, detail = check_witness(FREE, wit, np.random.default_rng(0))
    assert ok, detail
    assert wit.displacement != 0


def test_free_words_count():
    assert len(free_reduced_words([0, 1], 4)) == 4 + 12 + 36 + 108


def test_report_for_edge_graph():
    spec = GraphProductSpec.make([0, 1, 2], [(0, 1), (1, 2)], {1: 2}, slack=6)
    r = verify_graph_product(spec, EqualityPolicy(samples=2000))
    assert r["ok"]
    assert all(e["identity"] for e in r["edges"]) and r["relations"][0]["identity"]
    assert r["non_edges"][0]["pair"] == [0, 2] and r["non_edges"][0]["nontrivial"]


def test_sampler_catches_non_identity():
    from tfgkit.cocycle import commutator
    from tfgkit.sampling import identity_on_bulk
    comm = commutator(FREE.generator(0), FREE.generator(1))
    assert identity_on_bulk([comm], BeltSampler(FREE), np.random.default_rng(2), 5000)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_parse_locality(seed):
    rng = np.random.default_rng(seed)
    row = np.array(BeltSampler(FREE).random_body(rng, 400), dtype=np.uint8)
    full = parse_belts(SMALL, SMALL.coding(), row)
    margin = FREE.lexicon.max_length + 2
    lo, hi = sorted(int(v) for v in rng.integers(0, 400, 2))
    part = parse_belts(SMALL, SMALL.coding(), row[lo:hi])
    inner = lambda blocks, off: {(b.start + off, b.key) for b in blocks
                                 if lo + margin <= b.start + off and b.end + off <= hi - margin}
    assert inner(full.blocks, 0) == inner(part.blocks, lo)
    for cell, owners in full.shared.items():
        assert len(owners) == 2
