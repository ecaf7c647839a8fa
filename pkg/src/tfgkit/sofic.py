"""Embedding the full group of a transitive vertex shift into a full shift.

Each block w_a of the codebook has one simulating cell (symbol a), p periodic
cells and r transition cells.  Along a belt the cycle reads the simulating
cells left to right, the right bridge u_R in the last block's transition
cells, the periodic cells right to left (spelling tau, block by block), and
the left bridge u_L in the first block's transition cells.  tau is the
reversal of the chosen cycle t when that is itself a cycle, so the periodic
cells hold t from left to right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .belts import BookLexicon, decode_blocks
from .cocycle import Named, Proof, TfgElement, check_scenes
from .errors import NotTransitive, UsageError
from .simulation import simulate
from .symbolic import EPC, Alphabet, Codebook, VertexShift, full_shift, generate_codebook


@dataclass
class EmbeddingScheme:
    shift: VertexShift
    target_size: int
    codebook: Codebook
    t: tuple
    tau: tuple  # periodic word in reading order
    r: int
    left_bridge: dict  # a -> u with tau u a admissible
    right_bridge: dict  # a -> u with a u tau admissible

    @property
    def p(self):
        return len(self.t)

    @property
    def block_length(self):
        return min(len(w) for w in self.codebook.by_word)

    def periodic_cells(self):
        """Symbols stored in the periodic cells from left to right."""
        return tuple(reversed(self.tau))

    def to_json(self):
        return {"shift": self.shift.describe(), "target_alphabet": self.target_size,
                "t": list(self.t), "tau": list(self.tau), "p": self.p, "r": self.r,
                "codebook": {str(k): "".join(map(str, w)) for k, w in self.codebook.entries.items()},
                "left_bridge": {str(a): list(u) for a, u in self.left_bridge.items()},
                "right_bridge": {str(a): list(u) for a, u in self.right_bridge.items()},
                "cycle_layout": "simulating L->R, u_R, periodic R->L reading tau, u_L"}


def least_cycle(shift: VertexShift, min_length=2):
    """Lexicographically least primitive cycle of the least length >= min_length."""
    for p in range(min_length, shift.size * 4 + min_length + 1):
        for w in shift.periodic_words(p):
            w = tuple(int(s) for s in w)
            if all(w[:d] * (p // d) != w for d in range(1, p) if p % d == 0):
                return w
    raise UsageError("no cycle found")


def make_scheme(shift: VertexShift, target_size: int = 4, codebook: Codebook | None = None
                ) -> EmbeddingScheme:
    if not shift.is_transitive():
        raise NotTransitive("the vertex shift is not transitive")
    live = shift.live_symbols
    r = max(len(shift.shortest_bridge(a, b)) for a in live for b in live)
    t = least_cycle(shift)
    rev = t[::-1]
    tau = rev if shift.admissible(rev + rev) else t
    left = {a: shift.shortest_bridge(tau[-1], a) for a in live}
    right = {a: shift.shortest_bridge(a, tau[0]) for a in live}
    need = 1 + len(t) + r
    if codebook is None:
        codebook = generate_codebook(Alphabet(target_size), live, need)
    else:
        if set(codebook.entries) != set(live):
            raise UsageError("codebook keys must be the live symbols of the shift")
        if min(len(w) for w in codebook.entries.values()) < need:
            raise UsageError(f"codewords must have length at least {need}")
    return EmbeddingScheme(shift, target_size, codebook, t, tau, r, left, right)


@dataclass
class SoficParse:
    preblocks: list  # (start, length, symbol)
    removed: list  # indices of preblocks in forbidden words
    erased: list  # indices of preblocks on length-one belts
    belts: list  # lists of preblock indices
    cycles: list  # per belt: [(position, simulated symbol, role)]


def parse_sofic_belts(scheme: EmbeddingScheme, window) -> SoficParse:
    seq = np.asarray(window, dtype=np.uint8)
    lex = BookLexicon(scheme.codebook)
    found = decode_blocks(lex, seq)
    pre = [(b.start, b.length, b.key) for b in found]
    X = scheme.shift
    runs = []
    for i, (s, n, a) in enumerate(pre):
        if runs and pre[runs[-1][-1]][0] + pre[runs[-1][-1]][1] == s:
            runs[-1].append(i)
        else:
            runs.append([i])
    removed = set()
    for run in runs:
        for i in run:
            if pre[i][2] not in X.live_symbols:
                removed.add(i)
        for i, j in zip(run, run[1:]):
            if not X.allowed(pre[i][2], pre[j][2]):
                removed.update((i, j))
    belts, erased = [], []
    for run in runs:
        cur = []
        for i in run + [None]:
            if i is not None and i not in removed:
                cur.append(i)
                continue
            if len(cur) == 1:
                erased.append(cur[0])
            elif cur:
                belts.append(cur)
            cur = []
    p, r = scheme.p, scheme.r
    cells = scheme.periodic_cells()
    cycles = []
    for belt in belts:
        cyc = []
        for i in belt:
            cyc.append((pre[i][0], pre[i][2], "simulating"))
        last, first = pre[belt[-1]], pre[belt[0]]
        for k, a in enumerate(scheme.right_bridge[last[2]]):
            cyc.append((last[0] + 1 + p + k, a, "transition"))
        for i in reversed(belt):
            s = pre[i][0]
            for k in range(p - 1, -1, -1):
                cyc.append((s + 1 + k, cells[k], "periodic"))
        for k, a in enumerate(scheme.left_bridge[first[2]]):
            cyc.append((first[0] + 1 + p + k, a, "transition"))
        cycles.append(cyc)
    return SoficParse(pre, sorted(removed), erased, belts, cycles)


class SoficConstruction:
    """Belt-following step and symbol reader for an embedding scheme."""

    def __init__(self, scheme: EmbeddingScheme):
        self.scheme = scheme
        lmax = max(len(w) for w in scheme.codebook.by_word)
        self.lmax = lmax
        self.domain = full_shift(scheme.target_size)
        self.radius = 3 * lmax + 2
        self.max_disp = 2 * lmax
        self._steps = {}
        self._step = None

    def arrays(self, data, cyclic, cache):
        key = ("sofic-arrays", id(self))
        if key in cache:
            return cache[key]
        n, width = data.shape
        disp = np.zeros((n, width), dtype=np.int32)
        back = np.zeros((n, width), dtype=np.int32)
        sym = np.zeros((n, width), dtype=np.uint8)
        copies = 2 * math.ceil(self.radius / width) + 1 if cyclic else 1
        off = (copies // 2) * width
        for row in self._rows_with_codewords(data, cyclic):
            seq = np.tile(data[row], copies) if cyclic else data[row]
            for cyc in parse_sofic_belts(self.scheme, seq).cycles:
                pos = np.array([c[0] for c in cyc], dtype=np.int64)
                nxt = np.roll(pos, -1)
                s = np.array([c[1] for c in cyc], dtype=np.uint8)
                here = (pos >= off) & (pos < off + width)
                disp[row, pos[here] - off] = (nxt - pos)[here]
                sym[row, pos[here] - off] = s[here]
                there = (nxt >= off) & (nxt < off + width)
                back[row, nxt[there] - off] = (pos - nxt)[there]
        cache[key] = (disp, back, sym)
        return cache[key]

    def _rows_with_codewords(self, data, cyclic):
        ext = np.tile(data, (1, 2)) if cyclic else data
        hit = np.zeros(data.shape[0], dtype=bool)
        for w in self.scheme.codebook.by_word:
            n = ext.shape[1] - len(w) + 1
            if n <= 0:
                continue
            m = np.ones((data.shape[0], n), dtype=bool)
            for j, a in enumerate(w):
                m &= ext[:, j:j + n] == a
            hit |= m.any(axis=1)
        return np.flatnonzero(hit)

    def step_program(self, inverse=False) -> Named:
        if inverse not in self._steps:
            idx = 1 if inverse else 0
            self._steps[inverse] = Named(
                "fX^-1" if inverse else "fX", self.domain, self.radius, self.max_disp,
                lambda d, cy, ca, idx=idx: self.arrays(d, cy, ca)[idx],
                inverse=lambda inv=inverse: self.step_program(not inv),
                scenes=self.scenes, family=self)
        return self._steps[inverse]

    def reader(self) -> Named:
        prog = Named("sX", self.domain, self.radius, 0,
                     lambda d, cy, ca: self.arrays(d, cy, ca)[2], family=self)
        prog.target = self.scheme.shift
        return prog

    def step_element(self) -> TfgElement:
        if self._step is None:
            prog = self.step_program()
            self._step = TfgElement(prog, Proof("scenes", check_scenes(prog)), "fX")
        return self._step

    def embed(self, g: TfgElement) -> TfgElement:
        if g.domain != self.scheme.shift:
            raise UsageError("element does not act on the scheme's shift")
        return simulate(g, self.step_element(), self.reader(), label=f"emb({g.label})")

    def token(self, a):
        return self.scheme.codebook[a]

    def scenes(self, seed: int = 0, extra: int = 150):
        live = self.scheme.shift.live_symbols
        words = [self.token(a) for a in live]
        rng = np.random.default_rng(seed)
        out = [EPC((0,))]
        for w in words:
            out += [EPC((0,), w, (0,)), EPC.periodic(w), EPC(w, (), (0,)), EPC((0,), (), w)]
        for a in words:
            for b in words:
                out += [EPC((0,), a + b, (0,)), EPC.periodic(a + b), EPC(a, b, (0,)),
                        EPC((0,), a, b), EPC(a, (), b), EPC((1,), a + (0,) + b, (0,))]
        for _ in range(extra):
            n = int(rng.integers(2, 7))
            body = sum((words[int(i)] for i in rng.integers(0, len(words), n)), ())
            tails = [words[int(rng.integers(0, len(words)))] if rng.random() < 0.4 else (0,)
                     for _ in range(2)]
            out.append(EPC(tails[0], body, tails[1]))
            out.append(EPC.periodic(body))
        return out

    def sampler(self):
        from .sampling import TokenSampler
        c = self

        class _Sampler(TokenSampler):
            def random_token(self, rng):
                live = c.scheme.shift.live_symbols
                return c.token(live[int(rng.integers(0, len(live)))])

        return _Sampler(junk=self.scheme.target_size)


def token_periodic_configs(scheme: EmbeddingScheme, period_bound: int, gap: int | None = None):
    """Periodic points of period <= bound made of codewords and a gap symbol.

    The gap symbol starts no codeword, so every periodic point has the same
    codeword occurrences as one of these and hence the same orbit structure.
    """
    from .lamplighter import token_words
    firsts = {w[0] for w in scheme.codebook.by_word}
    if gap is None:
        gap = min(a for a in range(scheme.target_size) if a not in firsts)
    toks = sorted(scheme.codebook.by_word)
    return [EPC.periodic(w) for p in range(1, period_bound + 1)
            for w in token_words(toks, gap, p)]


def golden_mean_elements():
    """Shift plus two finite-order rules on the golden mean shift."""
    from .cocycle import shift_element, table_from_function, verify_bijective
    from .symbolic import golden_mean
    X = golden_mean()

    def swap(w):  # exchange the zeros of 1001
        if w[1:5] == (1, 0, 0, 1):
            return 1
        if w[0:4] == (1, 0, 0, 1):
            return -1
        return 0

    def rotate(w):  # cycle the zeros of 10001
        if w[2:7] == (1, 0, 0, 0, 1):
            return 1
        if w[1:6] == (1, 0, 0, 0, 1):
            return 1
        if w[0:5] == (1, 0, 0, 0, 1):
            return -2
        return 0

    a = verify_bijective(table_from_function(X, 2, swap, name="swap1001"), label="a")
    b = verify_bijective(table_from_function(X, 3, rotate, name="rot10001"), label="b")
    return [shift_element(X), a, b]


def golden_mean_fixture():
    """Scheme with the codewords 3210 and 3220 over four symbols."""
    from .symbolic import golden_mean
    book = Codebook({0: (3, 2, 1, 0), 1: (3, 2, 2, 0)}, Alphabet(4))
    return make_scheme(golden_mean(), 4, book)
