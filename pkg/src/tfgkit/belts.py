"""Conveyor belts for graph products of cyclic groups.

A configuration is cut into blocks: occurrences of codewords w(u, a, b, v).
The first a positions of a block are its top precells, the next b its bottom
precells.  Maximal runs of adjacent blocks of one vertex type u form a belt,
whose cells are wired into a cycle: tops left to right, then bottoms right to
left.  Where a block of type u sits next to a block of a smaller, non-adjacent
type u', one cell is shared between the two belts.  Colour u's step rule
follows its cycles; the colour-u reader reports the symbol of v stored for
each cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import (Named, Proof, TfgElement, check_scenes, dial_table, even_double,
                      shift_element, verify_bijective)
from .errors import UsageError
from .simulation import simulate
from .symbolic import EPC, CanonicalCoding, Codebook, full_shift


@dataclass
class GraphProductSpec:
    vertices: tuple
    edges: frozenset
    node_groups: dict  # vertex -> 0 for Z, q >= 2 for Z/q
    constants: dict  # vertex -> c_u >= 1
    slack: int = 100

    @classmethod
    def make(cls, vertices, edges=(), node_groups=None, slack=100, constants=None):
        vertices = tuple(sorted(vertices))
        es = set()
        for e in edges:
            u, v = tuple(e)
            if u == v:
                raise UsageError("graph edges must join distinct vertices")
            if u not in vertices or v not in vertices:
                raise UsageError(f"edge {e} uses an unknown vertex")
            es.add(frozenset((u, v)))
        groups = {u: 0 for u in vertices}
        groups.update(node_groups or {})
        for u, q in groups.items():
            if q != 0 and q < 2:
                raise UsageError("cyclic node groups need order at least 2")
        consts = {u: 1 for u in vertices}
        consts.update(constants or {})
        if any(c < 1 for c in consts.values()):
            raise UsageError("slack constants must be positive")
        return cls(vertices, frozenset(es), groups, consts, slack)

    def adjacent(self, u, v) -> bool:
        return frozenset((u, v)) in self.edges

    def theta(self, u) -> int:
        q = self.node_groups[u]
        return 2 if q == 0 else q

    def max_cells(self, u) -> int:
        return self.slack * self.constants[u]

    def coding(self) -> CanonicalCoding:
        return CanonicalCoding(self.vertices, {u: self.max_cells(u) for u in self.vertices},
                               {u: self.theta(u) for u in self.vertices})

    def to_json(self):
        return {"vertices": list(self.vertices),
                "edges": sorted(sorted(e) for e in self.edges),
                "node_groups": {str(u): q for u, q in self.node_groups.items()},
                "constants": {str(u): c for u, c in self.constants.items()},
                "slack": self.slack}

    @classmethod
    def from_json(cls, obj):
        groups = {int(k): int(v) for k, v in obj.get("node_groups", {}).items()}
        consts = {int(k): int(v) for k, v in obj.get("constants", {}).items()}
        return cls.make(obj["vertices"], [tuple(e) for e in obj.get("edges", [])], groups,
                        int(obj.get("slack", 100)), consts)


class CodingLexicon:
    def __init__(self, coding: CanonicalCoding):
        self.coding = coding
        self.max_length = coding.max_length()

    def candidates(self, seq: np.ndarray):
        if len(seq) < 3:
            return []
        return np.flatnonzero((seq[:-2] == 1) & (seq[1:-1] == 1) & (seq[2:] == 0)).tolist()

    def match_at(self, seq, pos):
        return self.coding.decode_at(seq, pos)


class BookLexicon:
    """Explicit codebook whose keys are (u, a, b, v) tuples."""

    def __init__(self, book: Codebook):
        self.book = book
        self.max_length = max(book.lengths)
        self.firsts = sorted({w[0] for w in book.by_word})

    def candidates(self, seq):
        return np.flatnonzero(np.isin(seq, self.firsts)).tolist()

    def match_at(self, seq, pos):
        return self.book.match_at(seq, pos)


@dataclass
class Block:
    start: int
    length: int
    key: tuple
    top: list = field(default_factory=list)
    bottom: list = field(default_factory=list)

    @property
    def vertex(self):
        return self.key[0]

    @property
    def end(self):
        return self.start + self.length


@dataclass
class BeltParse:
    blocks: list
    belts: list  # (vertex, [block indices])
    cycles: dict  # vertex -> list of [(position, symbol), ...] in cycle order
    shared: dict  # position -> {vertex: symbol}


def decode_blocks(lexicon, seq) -> list:
    arr = np.asarray(seq, dtype=np.uint8)
    seq = arr.tolist()
    blocks = []
    last_end = -1
    for pos in lexicon.candidates(arr):
        if pos < last_end:
            continue
        hit = lexicon.match_at(seq, pos)
        if hit is None:
            continue
        key, length = hit
        blocks.append(Block(pos, length, key))
        last_end = pos + length
    return blocks


def parse_blocks(spec: GraphProductSpec, lexicon, seq) -> BeltParse:
    blocks = decode_blocks(lexicon, seq)
    for b in blocks:
        _, a, nb, _ = b.key
        b.top = list(range(b.start, b.start + a))
        b.bottom = list(range(b.start + a, b.start + a + nb))
    # shared cells between adjacent blocks of non-commuting types
    for left, right in zip(blocks, blocks[1:]):
        if left.end != right.start or left.vertex == right.vertex:
            continue
        if spec.adjacent(left.vertex, right.vertex):
            continue
        if left.vertex > right.vertex:
            left.bottom[-1] = right.start
        else:
            right.top[0] = left.start + left.key[1] + left.key[2] - 1
    belts = []
    i = 0
    while i < len(blocks):
        j = i
        while j + 1 < len(blocks) and blocks[j + 1].vertex == blocks[i].vertex \
                and blocks[j].end == blocks[j + 1].start:
            j += 1
        belts.append((blocks[i].vertex, list(range(i, j + 1))))
        i = j + 1
    cycles = {u: [] for u in spec.vertices}
    owners = {}
    for u, idx in belts:
        cyc = []
        for k in idx:
            b = blocks[k]
            v = b.key[3]
            cyc.extend((p, v[j]) for j, p in enumerate(b.top))
        for k in reversed(idx):
            b = blocks[k]
            v, a = b.key[3], b.key[1]
            cyc.extend((p, v[a + j]) for j, p in reversed(list(enumerate(b.bottom))))
        cycles.setdefault(u, []).append(cyc)
        for p, s in cyc:
            owners.setdefault(p, {})[u] = s
    shared = {p: d for p, d in owners.items() if len(d) > 1}
    return BeltParse(blocks, belts, cycles, shared)


def parse_belts(spec: GraphProductSpec, codebook, window) -> BeltParse:
    if isinstance(codebook, Codebook):
        lexicon = BookLexicon(codebook)
    elif isinstance(codebook, CanonicalCoding):
        lexicon = CodingLexicon(codebook)
    else:
        lexicon = codebook
    return parse_blocks(spec, lexicon, window)


class BeltConstruction:
    """Step rules, readers and node generators for one graph product."""

    def __init__(self, spec: GraphProductSpec, lexicon=None):
        self.spec = spec
        self.lexicon = lexicon or CodingLexicon(spec.coding())
        self.domain = full_shift(2)
        lmax = self.lexicon.max_length
        self.radius = 3 * lmax + 2
        self.max_disp = 2 * lmax
        self.colour = {u: i for i, u in enumerate(spec.vertices)}
        self._steps = {}
        self._elements = {}
        self._generators = {}

    # -- parsing into arrays ------------------------------------------------
    def arrays(self, data, cyclic, cache):
        key = ("belt-arrays", id(self))
        if key in cache:
            return cache[key]
        n, width = data.shape
        ncol = len(self.spec.vertices)
        disp = np.zeros((ncol, n, width), dtype=np.int32)
        back = np.zeros((ncol, n, width), dtype=np.int32)
        sym = np.zeros((ncol, n, width), dtype=np.uint8)
        if cyclic:
            copies = 2 * math.ceil(self.radius / width) + 1
            off = (copies // 2) * width
            ext = np.tile(data, (1, 3 if copies >= 3 else copies))
        else:
            copies, off, ext = 1, 0, data
        marker = (ext[:, :-2] == 1) & (ext[:, 1:-1] == 1) & (ext[:, 2:] == 0)
        for r in np.flatnonzero(marker.any(axis=1)):
            seq = np.tile(data[r], copies) if cyclic else data[r]
            parse = parse_blocks(self.spec, self.lexicon, seq)
            for u, cycs in parse.cycles.items():
                c = self.colour[u]
                for cyc in cycs:
                    pos = np.array([p for p, _ in cyc], dtype=np.int64)
                    nxt = np.roll(pos, -1)
                    s = np.array([v for _, v in cyc], dtype=np.uint8)
                    here = (pos >= off) & (pos < off + width)
                    disp[c, r, pos[here] - off] = (nxt - pos)[here]
                    sym[c, r, pos[here] - off] = s[here]
                    there = (nxt >= off) & (nxt < off + width)
                    back[c, r, nxt[there] - off] = (pos - nxt)[there]
        cache[key] = (disp, back, sym)
        return cache[key]

    # -- rules ------------------------------------------------------------------
    def step_program(self, u, inverse=False) -> Named:
        key = (u, inverse)
        if key not in self._steps:
            c = self.colour[u]
            idx = 1 if inverse else 0
            name = f"f{u}" + ("^-1" if inverse else "")
            prog = Named(name, self.domain, self.radius, self.max_disp,
                         lambda d, cy, ca, c=c, idx=idx: self.arrays(d, cy, ca)[idx][c],
                         inverse=lambda u=u, inverse=inverse: self.step_program(u, not inverse),
                         scenes=lambda: self.scenes(), family=self)
            self._steps[key] = prog
        return self._steps[key]

    def reader(self, u) -> Named:
        c = self.colour[u]
        prog = Named(f"s{u}", self.domain, self.radius, 0,
                     lambda d, cy, ca, c=c: self.arrays(d, cy, ca)[2][c], family=self)
        prog.target = full_shift(self.spec.theta(u))
        return prog

    def step_element(self, u, verify=True) -> TfgElement:
        """One forward step along colour-u cycles."""
        if u not in self._elements:
            prog = self.step_program(u)
            proof = Proof(**{"engine": "scenes", "detail": check_scenes(prog)}) if verify \
                else Proof("deferred")
            self._elements[u] = TfgElement(prog, proof, f"f{u}")
        return self._elements[u]

    def node_element(self, u) -> TfgElement:
        q = self.spec.node_groups[u]
        if q == 0:
            return even_double(shift_element(full_shift(2)))
        return even_double(verify_bijective(dial_table(q), label=f"dial{q}"))

    def generator(self, u, verify=True) -> TfgElement:
        if u not in self._generators:
            g = simulate(self.node_element(u), self.step_element(u, verify), self.reader(u),
                         label=f"t{u}")
            self._generators[u] = g
        return self._generators[u]

    # -- scene family for verifying the step rules -------------------------------
    def representative_keys(self):
        keys = []
        for u in self.spec.vertices:
            cap = self.spec.max_cells(u)
            theta = self.spec.theta(u)
            shapes = sorted({(1, 1), (1, min(2, cap)), (min(2, cap), 1), (cap, cap)})
            for a, b in shapes:
                v = tuple((j * 7 + a) % theta for j in range(a + b))
                keys.append((u, a, b, v))
        return keys

    def encode(self, key):
        coding = self.lexicon.coding if isinstance(self.lexicon, CodingLexicon) else None
        if coding is not None:
            return coding.encode(key)
        return self.lexicon.book[key]

    def scenes(self, extra_triples: int = 120, seed: int = 0):
        keys = self.representative_keys()
        words = {k: self.encode(k) for k in keys}
        rng = np.random.default_rng(seed)
        gap = (0,)
        out = []
        for k in keys:
            out.append(EPC(gap, words[k], gap))
            out.append(EPC.periodic(words[k]))
            out.append(EPC(gap, words[k], words[k]))
            out.append(EPC(words[k], (), gap))
            out.append(EPC((1,), words[k], (0, 1)))
        for k1 in keys:
            for k2 in keys:
                out.append(EPC(gap, words[k1] + words[k2], gap))
                out.append(EPC.periodic(words[k1] + words[k2]))
        for _ in range(extra_triples):
            picks = [keys[i] for i in rng.integers(0, len(keys), 3)]
            body = sum((words[k] for k in picks), ())
            out.append(EPC(gap, body + words[picks[0]] + gap + words[picks[1]], gap))
            out.append(EPC(words[picks[2]], body, words[picks[1]]))
        return out
