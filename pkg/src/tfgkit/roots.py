"""Root subshifts and the embedding of [[X]] wr S_k into [[root_k X]].

A configuration of the k-th root carries base symbols on a single residue
class mod k and the padding symbol ``#`` everywhere else.  A head at offset o
from the nearest base symbol at or left of it plays the role of copy o.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cocycle import (EqualityPolicy, Program, Proof, TfgElement, compose, equal, identity,
                      periodic_permutation, verify_bijective)
from .errors import DomainMismatch, UsageError
from .symbolic import EPC, Alphabet, Domain


@dataclass(frozen=True, eq=True)
class RootSubshift(Domain):
    base: Domain
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("root order must be positive")

    @property
    def alphabet(self):
        return Alphabet(self.base.size + 1, tuple(self.base.alphabet.names) + ("#",))

    @property
    def size(self):
        return self.base.size + 1

    @property
    def pad(self):
        return self.base.size

    def _spread(self, length, phase, base_words):
        out = np.full((len(base_words), length), self.pad, dtype=np.uint8)
        out[:, phase::self.k] = base_words
        return out

    def words(self, length):
        parts = []
        for j in range(self.k):
            m = len(range(j, length, self.k))
            base = self.base.words(m) if m else np.zeros((1, 0), dtype=np.uint8)
            parts.append(self._spread(length, j, base))
        allw = np.concatenate(parts) if parts else np.zeros((0, length), dtype=np.uint8)
        return np.unique(allw, axis=0) if length else allw[:1]

    def count_words(self, length):
        total = 0
        blank = False
        for j in range(self.k):
            m = len(range(j, length, self.k))
            if m == 0:
                blank = True
            else:
                total += self.base.count_words(m)
        return total + (1 if blank else 0)

    def periodic_words(self, p):
        if p % self.k:
            return np.zeros((0, p), dtype=np.uint8)
        base = self.base.periodic_words(p // self.k)
        return np.concatenate([self._spread(p, j, base) for j in range(self.k)])

    def admissible(self, word):
        word = list(word)
        if any(not 0 <= s <= self.pad for s in word):
            return False
        hits = [i for i, s in enumerate(word) if s != self.pad]
        if not hits:
            return len(word) < self.k
        j = hits[0] % self.k
        if hits != list(range(j, len(word), self.k)):
            return False
        return self.base.admissible([word[i] for i in hits])

    def spread(self, y: EPC, phase: int = 0) -> EPC:
        """The root configuration carrying y on the class ``phase`` mod k."""
        pad = (self.pad,) * (self.k - 1)
        ex = lambda w: tuple(s for c in w for s in (c,) + pad)
        return EPC(ex(y.left), ex(y.center), ex(y.right), self.k * y.start).shift(-phase)

    def random_epc(self, rng, max_period=4, max_center=24):
        from .sampling import random_epc
        y = random_epc(self.base, rng, max_period, max_center)
        return self.spread(y, int(rng.integers(0, self.k)))

    def describe(self):
        return {"kind": "root", "k": self.k, "base": self.base.describe()}


def sqrt_shift(base: Domain, k: int) -> RootSubshift:
    return RootSubshift(base, k)


def _check_perm(rho, k):
    rho = tuple(int(r) for r in rho)
    if sorted(rho) != list(range(k)):
        raise UsageError(f"{rho} is not a permutation of 0..{k - 1}")
    return rho


class RootElement(Program):
    """Head at copy o moves to copy rho(o), then f_rho(o) acts k steps at a time."""

    kind = "root-wreath"

    def __init__(self, domain: RootSubshift, fs, rho):
        k = domain.k
        if len(fs) != k:
            raise UsageError(f"need {k} base elements, got {len(fs)}")
        for f in fs:
            if f.domain != domain.base:
                raise DomainMismatch("base elements must act on the root's base shift")
        self.domain, self.fs, self.rho = domain, tuple(fs), _check_perm(rho, k)
        self.max_disp = (k - 1) + k * max(f.max_disp for f in fs)
        # the radius also covers the displacement so the window engine sees
        # every collision distance inside one window
        self.radius = max((k - 1) + k * max(f.radius for f in fs), self.max_disp)

    def values(self, tape, rows, cols):
        k, pad = self.domain.k, self.domain.pad
        cols = np.asarray(cols, dtype=np.int64)
        rows = np.broadcast_to(np.asarray(rows), cols.shape)
        off = np.full(cols.shape, -1, dtype=np.int64)
        for d in range(k):
            sym = tape.at(rows, tape.advance(cols, -d))
            off[(off < 0) & (sym != pad)] = d
        out = np.zeros(cols.shape, dtype=np.int64)
        view = tape.view(k)
        for o in range(k):
            sel = np.flatnonzero(off == o)
            if not sel.size:
                continue
            j = self.rho[o]
            anchor = tape.advance(cols[sel], -o)
            base = self.fs[j].program.values(view, rows[sel], anchor)
            out[sel] = (j - o) + k * base
        return out

    def parts(self):
        return tuple(f.program for f in self.fs)

    def describe(self):
        return f"wreath({', '.join(f.label or '?' for f in self.fs)}; {self.rho})"


@dataclass
class WreathWord:
    """Abstract element (f_0..f_{k-1}; rho) of [[X]] wr S_k."""

    fs: tuple
    rho: tuple

    def __mul__(self, other: "WreathWord") -> "WreathWord":
        # self after other: copy o -> other.rho(o) -> self.rho(other.rho(o))
        k = len(self.rho)
        inv = [0] * k
        for i, r in enumerate(self.rho):
            inv[r] = i
        fs = tuple(compose(self.fs[j], other.fs[inv[j]]) for j in range(k))
        rho = tuple(self.rho[other.rho[o]] for o in range(k))
        return WreathWord(fs, rho)

    def same_as(self, other, policy=None) -> bool:
        policy = policy or EqualityPolicy(samples=0)
        return self.rho == other.rho and all(
            equal(a, b, policy).equal for a, b in zip(self.fs, other.fs))


def embed_wreath_Sk(root: RootSubshift, fs, rho) -> TfgElement:
    prog = RootElement(root, fs, rho)
    elem = verify_bijective(prog, label=prog.describe())
    return elem


def embed_word(root: RootSubshift, w: WreathWord) -> TfgElement:
    return embed_wreath_Sk(root, w.fs, w.rho)


def default_generators(root: RootSubshift):
    """Generators used for the law and faithfulness checks."""
    from .cocycle import pi01_table, shift_element
    base = root.base
    k = root.k
    ident = identity(base)
    if k == 2:
        sigma = shift_element(base)
        return [WreathWord((sigma, ident), (0, 1)), WreathWord((ident, ident), (1, 0))]
    pi = verify_bijective(pi01_table(base), label="pi01")
    cyc = tuple((o + 1) % k for o in range(k))
    swap = (1, 0) + tuple(range(2, k))
    return [WreathWord((pi,) + (ident,) * (k - 1), tuple(range(k))),
            WreathWord((ident,) * k, swap), WreathWord((ident,) * k, cyc)]


def words_up_to(gens, length):
    out = []
    layer = [((i,), g) for i, g in enumerate(gens)]
    out.extend(layer)
    for _ in range(length - 1):
        layer = [(idx + (i,), w * g) for idx, w in layer for i, g in enumerate(gens)]
        out.extend(layer)
    return out


def check_wreath_law(root: RootSubshift, gens=None, length=3, period_bound=12) -> dict:
    """embed(product) equals the product of embeddings on every word."""
    gens = gens or default_generators(root)
    policy = EqualityPolicy(samples=0, period_bound=period_bound)
    embedded = [embed_word(root, g) for g in gens]
    failures = []
    words = words_up_to(gens, length)
    for idx, w in words:
        direct = embed_word(root, w)
        composed = embedded[idx[0]]
        for i in idx[1:]:
            composed = compose(composed, embedded[i])
        v = equal(direct, composed, policy)
        if not v.equal:
            failures.append({"word": list(idx), "witness": str(v.witness)})
    return {"words": len(words), "failures": failures, "tier": f"P<={period_bound} or E"}


def check_faithful(root: RootSubshift, gens=None, length=3, period_bound=8) -> dict:
    """Distinct abstract elements get distinct permutations of some period."""
    gens = gens or default_generators(root)
    distinct = []
    for _, w in words_up_to(gens, length):
        if not any(w.same_as(d) for d in distinct):
            distinct.append(w)
    perms = []
    for w in distinct:
        e = embed_word(root, w)
        perms.append({p: periodic_permutation(e, p) for p in range(1, period_bound + 1)
                      if p % root.k == 0})
    clashes = []
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            if all(np.array_equal(perms[i][p], perms[j][p]) for p in perms[i]):
                clashes.append([i, j])
    return {"elements": len(distinct), "clashes": clashes}
