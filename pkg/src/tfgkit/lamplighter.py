"""Lamplighter groups A wr Z acting on {0,1,2,3}^Z.

Blocks are the words ``3 2..2 1 0`` (unmarked) and ``3 2..2 2 0`` (marked) of
length 2|A|.  The first |A| cells of a block form its top row and the last |A|
its bottom row.  t moves the top row one block right and the bottom row one
block left, wrapping at the ends of a run; a generator h of A acts regularly
on the top row of marked blocks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cocycle import Named, TfgElement, check_scenes, commutator, compose, evaluate, invert, power
from .errors import UsageError
from .sampling import TokenSampler
from .symbolic import EPC, full_shift


@dataclass(frozen=True)
class FiniteAbelianGroup:
    orders: tuple

    def __post_init__(self):
        if not self.orders or any(q < 1 for q in self.orders):
            raise UsageError("group factors need positive orders")

    @classmethod
    def parse(cls, text: str):
        try:
            return cls(tuple(int(t) for t in text.split(",")))
        except ValueError:
            raise UsageError(f"bad group orders {text!r}") from None

    @property
    def size(self):
        return int(np.prod(self.orders))

    def elements(self):
        return list(itertools.product(*(range(q) for q in self.orders)))

    @property
    def zero(self):
        return tuple(0 for _ in self.orders)

    def add(self, a, b):
        return tuple((x + y) % q for x, y, q in zip(a, b, self.orders))

    def neg(self, a):
        return tuple((-x) % q for x, q in zip(a, self.orders))

    def scale(self, k, a):
        return tuple((k * x) % q for x, q in zip(a, self.orders))

    def index(self, a):
        i = 0
        for x, q in zip(a, self.orders):
            i = i * q + x % q
        return i

    def generators(self):
        out = []
        for i in range(len(self.orders)):
            out.append(tuple(1 if j == i else 0 for j in range(len(self.orders))))
        return out

    def is_endomorphism(self, matrix) -> bool:
        # column j is the image of the j-th unit vector; it must have order dividing q_j
        for j, qj in enumerate(self.orders):
            col = [matrix[i][j] for i in range(len(self.orders))]
            if any((qj * c) % qi for c, qi in zip(col, self.orders)):
                return False
        return True

    def apply(self, matrix, a):
        n = len(self.orders)
        return tuple(sum(matrix[i][j] * a[j] for j in range(n)) % self.orders[i]
                     for i in range(n))

    def endomorphisms(self):
        n = len(self.orders)
        ranges = [range(self.orders[i]) for i in range(n) for _ in range(n)]
        out = []
        for flat in itertools.product(*ranges):
            m = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
            if self.is_endomorphism(m):
                out.append(m)
        return out

    def identity_endomorphism(self):
        n = len(self.orders)
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _at(arr, k, cyclic):
    """out[..., i] = arr[..., i + k]; False outside a window."""
    if cyclic:
        return np.roll(arr, -k, axis=-1)
    out = np.zeros_like(arr)
    n = arr.shape[-1]
    if k >= 0:
        out[..., :max(0, n - k)] = arr[..., k:]
    else:
        out[..., -k:] = arr[..., :n + k]
    return out


class WreathConstruction:
    """Generators of A wr Z over the alphabet {0,1,2,3}."""

    def __init__(self, group: FiniteAbelianGroup):
        if group.size < 2:
            raise UsageError("the lamp group must be nontrivial")
        self.group = group
        self.half = group.size
        self.length = 2 * group.size
        self.domain = full_shift(4)
        self.plain = tuple([3] + [2] * (self.length - 3) + [1, 0])
        self.marked = tuple([3] + [2] * (self.length - 2) + [0])
        self.radius = 2 * self.length - 1
        self._programs = {}
        self._elements = {}

    # -- parsing -----------------------------------------------------------------
    def starts(self, data, cyclic, cache):
        key = ("lamp-starts", self.length)
        if key not in cache:
            data = np.asarray(data)
            plain = np.ones(data.shape, dtype=bool)
            marked = np.ones(data.shape, dtype=bool)
            for j in range(self.length):
                col = _at(data, j, cyclic) if j else data
                plain &= col == self.plain[j]
                marked &= col == self.marked[j]
            cache[key] = (plain | marked, marked)
        return cache[key]

    def offsets(self, data, cyclic, cache):
        """(offset in block or -1, block start shifted arrays) for every column."""
        key = ("lamp-offsets", self.length)
        if key not in cache:
            block, marked = self.starts(data, cyclic, cache)
            off = np.full(block.shape, -1, dtype=np.int16)
            mk = np.zeros(block.shape, dtype=bool)
            nxt = np.zeros(block.shape, dtype=bool)
            prv = np.zeros(block.shape, dtype=bool)
            for j in range(self.length):
                here = _at(block, -j, cyclic)
                off[here] = j
                mk |= here & _at(marked, -j, cyclic)
                nxt |= here & _at(block, self.length - j, cyclic)
                prv |= here & _at(block, -self.length - j, cyclic)
            cache[key] = (off, mk, nxt, prv)
        return cache[key]

    # -- rules ---------------------------------------------------------------------
    def _t_values(self, data, cyclic, cache, inverse=False):
        off, _, nxt, prv = self.offsets(data, cyclic, cache)
        L, h = self.length, self.half
        top = (off >= 0) & (off < h)
        bottom = off >= h
        out = np.zeros(off.shape, dtype=np.int32)
        if not inverse:
            out[top] = np.where(nxt[top], L, h)
            out[bottom] = np.where(prv[bottom], -L, -h)
        else:
            out[top] = np.where(prv[top], -L, h)
            out[bottom] = np.where(nxt[bottom], L, -h)
        return out

    def _lamp_values(self, data, cyclic, cache, element):
        off, mk, _, _ = self.offsets(data, cyclic, cache)
        g = self.group
        table = np.zeros(self.half, dtype=np.int32)
        elems = g.elements()
        for j, e in enumerate(elems):
            table[j] = g.index(g.add(e, element)) - j
        out = np.zeros(off.shape, dtype=np.int32)
        sel = mk & (off >= 0) & (off < self.half)
        out[sel] = table[off[sel]]
        return out

    def scenes(self):
        toks = [self.plain, self.marked]
        junk = (1,)
        out = [EPC((0,)), EPC.periodic(self.plain), EPC.periodic(self.marked)]
        for n in range(1, 4):
            for combo in itertools.product(toks, repeat=n):
                body = sum(combo, ())
                out.append(EPC((0,), body, (0,)))
                out.append(EPC(junk, body, (0, 1)))
                out.append(EPC.periodic(body))
                out.append(EPC.periodic(body + (0,)))
                out.append(EPC(combo[0], body, combo[-1]))
                out.append(EPC(combo[0], body, (0,)))
                out.append(EPC((0,), body, combo[-1]))
        for a, b in itertools.product(toks, repeat=2):
            out.append(EPC((0,), a + (0,) + b, (0,)))
            out.append(EPC((0,), a + (3, 2) + b, (0,)))
        return out

    def program(self, name):
        """Named rule for "t", "t^-1" or a group element tuple (lamp move)."""
        if name not in self._programs:
            if name in ("t", "t^-1"):
                inv = name == "t^-1"
                prog = Named(name, self.domain, self.radius, self.length,
                             lambda d, cy, ca, inv=inv: self._t_values(d, cy, ca, inv),
                             inverse=lambda inv=inv: self.program("t" if inv else "t^-1"),
                             scenes=self.scenes, family=self)
            else:
                g = self.group
                elem = tuple(name)
                label = "a" if g.orders == (2,) else "h" + "".join(map(str, elem))
                prog = Named(label, self.domain, self.length - 1, self.half - 1,
                             lambda d, cy, ca, e=elem: self._lamp_values(d, cy, ca, e),
                             inverse=lambda e=elem: self.program(g.neg(e)),
                             scenes=self.scenes, family=self)
            self._programs[name] = prog
        return self._programs[name]

    def element(self, name) -> TfgElement:
        if name not in self._elements:
            from .cocycle import Proof, verify_bijective
            prog = self.program(name)
            self._elements[name] = verify_bijective(prog, label=prog.name)
        return self._elements[name]

    @property
    def t(self):
        return self.element("t")

    def lamp(self, elem) -> TfgElement:
        return self.element(tuple(elem))

    def lamp_generators(self):
        return [self.lamp(e) for e in self.group.generators()]

    # -- witnesses -----------------------------------------------------------------
    def run_configuration(self, marks, origin_block=0, offset=0):
        """Finite run of blocks (True = marked) with the head in ``origin_block``."""
        body = sum((self.marked if m else self.plain for m in marks), ())
        return EPC((0,), body, (0,), -(origin_block * self.length + offset))

    def lamp_word(self, positions, elem=None):
        """Product of t^-i h t^i over ``positions``."""
        h = self.lamp(elem or self.group.generators()[0])
        out = None
        for i in positions:
            conj = compose(power(self.t, -i), compose(h, power(self.t, i)))
            out = conj if out is None else compose(out, conj)
        return out

    def lamp_witness(self, positions):
        """Single marked block under the leftmost lamp of ``positions``."""
        lo, hi = min(min(positions), 0), max(max(positions), 0)
        blocks = hi - lo + 3
        origin = -lo + 1
        marks = [False] * blocks
        marks[origin + min(positions)] = True
        return self.run_configuration(marks, origin)

    def sampler(self):
        return LampSampler(self)


class LampSampler(TokenSampler):
    token_share = 0.75

    def __init__(self, construction: WreathConstruction):
        super().__init__(junk=4)
        self.c = construction

    def random_token(self, rng):
        return self.c.marked if rng.random() < 0.4 else self.c.plain


def build_lamplighter():
    """(t, a) for Z2 wr Z."""
    c = WreathConstruction(FiniteAbelianGroup((2,)))
    return c.t, c.lamp((1,))


def token_words(tokens, gap, p):
    """All words of length p made of tokens and single gap symbols."""
    out = []

    def walk(prefix, left):
        if left == 0:
            out.append(prefix)
            return
        walk(prefix + (gap,), left - 1)
        for t in tokens:
            if len(t) <= left:
                walk(prefix + t, left - len(t))

    walk((), p)
    return out


def identity_on_tokens(elements, construction, period_bound):
    """Identity check on every period <= bound via token arrangements."""
    from .sampling import identity_on_periodic
    toks = [construction.plain, construction.marked]
    for p in range(1, period_bound + 1):
        words = token_words(toks, 1, p)
        w = identity_on_periodic(elements, [EPC.periodic(x) for x in words])
        if w:
            return w
    return None


def orbit_length(g: TfgElement, x: EPC, limit: int):
    """Least k <= limit with g^k fixing x, or None."""
    o = 0
    for k in range(1, limit + 1):
        o += evaluate(g, x.shift(o))
        if x.shift(o) == x:
            return k
    return None


def lamplighter_report(group: FiniteAbelianGroup, period_bound: int = 14, direct_bound: int = 10,
                       samples: int = 100_000, max_shift: int = 4, order_limit: int = 64,
                       seed: int = 0) -> dict:
    """Lamp orders, lamp commutation, witnesses for lamp words and the order of t."""
    from .cocycle import EqualityPolicy, differ_on_periodic, equal, identity, is_identity
    from .sampling import identity_on_bulk
    c = WreathConstruction(group)
    rng = np.random.default_rng(seed)
    t = c.t
    idp = identity(c.domain).program
    report = {"group": list(group.orders), "block_length": c.length, "ok": True,
              "bounds": {"period_bound": period_bound, "direct_bound": direct_bound,
                         "samples": samples, "max_shift": max_shift,
                         "order_limit": order_limit, "seed": seed},
              "generators": {"t": t.proof.to_json()}, "orders": [], "commutators": [],
              "lamp_words": [], "t_order": None}
    gens = group.generators()
    for h, q in zip(gens, group.orders):
        e = c.lamp(h)
        report["generators"][e.label] = e.proof.to_json()
        v = is_identity(power(e, q), EqualityPolicy(samples=samples, seed=seed,
                                                    period_bound=period_bound,
                                                    sampler=c.sampler()))
        report["orders"].append({"lamp": list(h), "order": q, "identity": v.equal,
                                 "tier": v.tier, "exact": v.exact})
        report["ok"] &= v.equal
    for i in range(max_shift + 1):
        for x, y in itertools.combinations_with_replacement(range(len(gens)), 2):
            if i == 0 and x == y:
                continue
            hx, hy = c.lamp(gens[x]), c.lamp(gens[y])
            conj = compose(power(t, -i), compose(hy, power(t, i)))
            comm = commutator(hx, conj)
            w = differ_on_periodic(comm.program, idp, direct_bound)
            w = w and {"config": w["config"].to_literal()}
            w = w or identity_on_tokens([comm], c, period_bound)
            if w is None and samples:
                w = identity_on_bulk([comm], c.sampler(), rng, samples)
            report["commutators"].append({"shift": i, "lamps": [list(gens[x]), list(gens[y])],
                                          "identity": w is None, "witness": w})
            report["ok"] &= w is None
    for positions in ([0], [0, 1], [-2, 1, 3], [0, 2, 4]):
        word = c.lamp_word(positions)
        x = c.lamp_witness(positions)
        v = evaluate(word, x)
        report["lamp_words"].append({"positions": positions, "config": x.to_literal(),
                                     "value": v, "nontrivial": v != 0})
        report["ok"] &= v != 0
    run = c.run_configuration([False] * (order_limit // 2 + 1), 0)
    n = orbit_length(t, run, 4 * order_limit)
    report["t_order"] = {"config_blocks": order_limit // 2 + 1, "orbit_length": n,
                         "exceeds": n is None or n > order_limit}
    report["ok"] &= report["t_order"]["exceeds"]
    return report
