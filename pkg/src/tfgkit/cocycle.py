"""Cocycle programs and topological full group elements.

An element acts by f(x) = shift^{c(x)}(x) where the cocycle c reads a window of
certified radius around the origin and returns a displacement bounded by a
certified maximum.  Programs are evaluated in bulk on tapes (see ``tape``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundsUnsound, DomainMismatch, InternalInconsistency, NotInjective,
                     NotSurjective, OffLanguage, ReadOutOfWindow, SearchBudgetExceeded, UsageError)
from .symbolic import EPC, Domain, FullShift, full_shift
from .tape import Tape, all_rows, cyclic_tape, window_tape

_SENTINEL = np.iinfo(np.int64).min


class Program:
    """Base class: ``values(tape, rows, cols)`` returns the cocycle per head."""

    domain: Domain
    radius: int
    max_disp: int
    kind = "program"

    def values(self, tape: Tape, rows, cols) -> np.ndarray:
        raise NotImplementedError

    def parts(self):
        return ()

    def describe(self) -> str:
        return self.kind


class Table(Program):
    kind = "table"

    def __init__(self, domain: Domain, radius: int, entries, max_disp: int | None = None,
                 name: str | None = None):
        """``entries`` is a dense int array indexed by the lexicographic rank of
        the window word (sentinel for inadmissible words) or a dict word->int."""
        self.domain = domain
        self.radius = radius
        k = domain.size
        length = 2 * radius + 1
        if isinstance(entries, dict):
            dense = np.full(k ** length, _SENTINEL, dtype=np.int64)
            for word, v in entries.items():
                word = tuple(word)
                if len(word) != length:
                    raise UsageError("table word has the wrong length")
                dense[_rank(word, k)] = v
            words = domain.words(length)
            if np.any(dense[_ranks(words, k)] == _SENTINEL):
                raise UsageError("table does not cover every admissible window")
            entries = dense
        self.entries = np.asarray(entries, dtype=np.int64)
        live = self.entries[self.entries != _SENTINEL]
        actual = int(np.abs(live).max()) if live.size else 0
        if max_disp is None:
            max_disp = actual
        elif actual > max_disp:
            raise BoundsUnsound(f"table entry {actual} exceeds the bound {max_disp}")
        self.max_disp = max_disp
        self.name = name

    def values(self, tape, rows, cols):
        k = self.domain.size
        code = np.zeros(len(cols), dtype=np.int64)
        for j in range(-self.radius, self.radius + 1):
            code = code * k + tape.at(rows, tape.advance(cols, j))
        out = self.entries[code]
        if out.size and (out == _SENTINEL).any():
            raise OffLanguage("window is not admissible for this table")
        return out

    def lookup(self, word) -> int:
        v = int(self.entries[_rank(tuple(word), self.domain.size)])
        if v == _SENTINEL:
            raise OffLanguage(f"window {tuple(word)} is not admissible")
        return v

    def items(self):
        words = self.domain.words(2 * self.radius + 1)
        vals = self.entries[_ranks(words, self.domain.size)]
        return words, vals

    def describe(self):
        return self.name or f"table(n={self.radius})"


def _rank(word, k):
    r = 0
    for s in word:
        r = r * k + s
    return r


def _ranks(words: np.ndarray, k: int) -> np.ndarray:
    r = np.zeros(len(words), dtype=np.int64)
    for j in range(words.shape[1]):
        r = r * k + words[:, j]
    return r


class Compose(Program):
    """Apply ``inner`` first, then ``outer``."""

    kind = "compose"

    def __init__(self, outer: Program, inner: Program):
        if outer.domain != inner.domain:
            raise DomainMismatch("cannot compose elements on different shifts")
        self.outer, self.inner, self.domain = outer, inner, outer.domain
        self.radius = max(inner.radius, inner.max_disp + outer.radius)
        self.max_disp = outer.max_disp + inner.max_disp

    def values(self, tape, rows, cols):
        vh = self.inner.values(tape, rows, cols)
        return vh + self.outer.values(tape, rows, tape.advance(cols, vh))

    def parts(self):
        return (self.outer, self.inner)

    def describe(self):
        return f"({self.outer.describe()} * {self.inner.describe()})"


class Inverse(Program):
    """Generic inverse: the unique k with c(shift^k x) = -k."""

    kind = "inverse"

    def __init__(self, inner: Program):
        self.inner, self.domain = inner, inner.domain
        self.radius = inner.max_disp + inner.radius
        self.max_disp = inner.max_disp

    def values(self, tape, rows, cols):
        out = np.zeros(len(cols), dtype=np.int64)
        found = np.zeros(len(cols), dtype=bool)
        order = [0] + [s * k for k in range(1, self.max_disp + 1) for s in (1, -1)]
        for k in order:
            todo = np.flatnonzero(~found)
            if not todo.size:
                break
            v = self.inner.values(tape, rows[todo] if np.ndim(rows) else rows,
                                  tape.advance(cols[todo], k))
            hit = v == -k
            out[todo[hit]] = k
            found[todo[hit]] = True
        if not found.all():
            raise InternalInconsistency("inverse displacement not found; rule is not bijective")
        return out

    def parts(self):
        return (self.inner,)

    def describe(self):
        return f"inv({self.inner.describe()})"


class Strided(Program):
    """Cocycle of ``inner`` read on every ``k``-th symbol and multiplied by ``k``."""

    kind = "even-double"

    def __init__(self, inner: Program, k: int = 2):
        if not isinstance(inner.domain, FullShift):
            raise DomainMismatch("doubling requires a full shift")
        self.inner, self.k, self.domain = inner, k, inner.domain
        self.radius = k * inner.radius
        self.max_disp = k * inner.max_disp

    def values(self, tape, rows, cols):
        return self.k * self.inner.values(tape.view(self.k), rows, cols)

    def parts(self):
        return (self.inner,)

    def describe(self):
        return f"double({self.inner.describe()})" if self.k == 2 else \
            f"stride{self.k}({self.inner.describe()})"


class Named(Program):
    """Builder-produced rule evaluated on whole rows.

    ``row_fn(data, cyclic, cache)`` returns an int matrix of values for every
    column; ``cache`` is shared by every rule evaluated on the same tape.
    On window tapes only columns at distance >= radius from both edges are
    read; the builder guarantees those are exact.
    """

    kind = "named"

    def __init__(self, name, domain, radius, max_disp, row_fn, inverse=None, scenes=None,
                 family=None):
        self.name, self.domain = name, domain
        self.radius, self.max_disp = radius, max_disp
        self.row_fn = row_fn
        self._inverse = inverse
        self.scenes = scenes
        self.family = family

    def inverse(self):
        return self._inverse() if callable(self._inverse) else self._inverse

    def matrix(self, tape: Tape) -> np.ndarray:
        key = ("named", id(self))
        mat = tape.cache.get(key)
        if mat is None:
            mat = self.row_fn(tape.data, tape.cyclic, tape.cache)
            tape.cache[key] = mat
        return mat

    def values(self, tape, rows, cols):
        cols = np.asarray(cols, dtype=np.int64)
        if tape.stride == 1:
            mat = self.matrix(tape)
            if tape.cyclic:
                return mat[rows, cols % tape.width].astype(np.int64)
            tape.check_span(cols, self.radius)
            return mat[rows, cols].astype(np.int64)
        win = tape.window(rows if np.ndim(rows) else np.full(len(cols), rows), cols, self.radius)
        return self.row_fn(win, False, {})[:, self.radius].astype(np.int64)

    def describe(self):
        return self.name


class Simulate(Program):
    """Run ``g`` on the configuration read along the orbit of ``f`` through ``s``."""

    kind = "simulate"

    def __init__(self, g: Program, f: Program, s: Program, f_inv: Program):
        self.g, self.f, self.s, self.f_inv = g, f, s, f_inv
        self.domain = f.domain
        steps = max(g.radius, g.max_disp)
        self.radius = steps * f.max_disp + max(f.radius, f_inv.radius, s.radius)
        self.max_disp = g.max_disp * f.max_disp

    def values(self, tape, rows, cols):
        n = self.g.radius
        cols = np.asarray(cols, dtype=np.int64)
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 0:
            rows = np.full(len(cols), int(rows))
        out = np.zeros(len(cols), dtype=np.int64)
        first = self.f.values(tape, rows, cols)
        moving = np.flatnonzero(first != 0)
        if not moving.size:
            return out
        r, c0 = rows[moving], cols[moving]
        theta = np.empty((len(moving), 2 * n + 1), dtype=np.uint8)
        theta[:, n] = self.s.values(tape, r, c0)
        fwd = [c0]
        disp_f = [np.zeros(len(moving), dtype=np.int64)]
        cur, acc = c0, np.zeros(len(moving), dtype=np.int64)
        for j in range(1, n + 1):
            step = self.f.values(tape, r, cur)
            cur, acc = tape.advance(cur, step), acc + step
            fwd.append(cur)
            disp_f.append(acc)
            theta[:, n + j] = self.s.values(tape, r, cur)
        bwd = [c0]
        disp_b = [np.zeros(len(moving), dtype=np.int64)]
        cur, acc = c0, np.zeros(len(moving), dtype=np.int64)
        for j in range(1, n + 1):
            step = self.f_inv.values(tape, r, cur)
            cur, acc = tape.advance(cur, step), acc + step
            bwd.append(cur)
            disp_b.append(acc)
            theta[:, n - j] = self.s.values(tape, r, cur)
        m = self.g.values(window_tape(theta), np.arange(len(moving)), np.full(len(moving), n))
        res = np.zeros(len(moving), dtype=np.int64)
        for sign, pos, disp, prog in ((1, fwd, disp_f, self.f), (-1, bwd, disp_b, self.f_inv)):
            steps = np.where(sign * m > 0, np.abs(m), 0)
            top = int(steps.max()) if steps.size else 0
            for j in range(1, min(top, n) + 1):
                sel = steps == j
                res[sel] = disp[j][sel]
            cur, acc = pos[n].copy(), disp[n].copy()
            for j in range(n + 1, top + 1):
                live = np.flatnonzero(steps >= j)
                step = prog.values(tape, r[live], cur[live])
                cur[live] = tape.advance(cur[live], step)
                acc[live] += step
                sel = steps == j
                res[sel] = acc[sel]
        out[moving] = res
        return out

    def parts(self):
        return (self.g, self.f, self.s, self.f_inv)

    def describe(self):
        return f"sim({self.g.describe()} | {self.f.describe()})"


class SymbolReader(Program):
    """Reads the symbol under the head (the identity symbol reader)."""

    kind = "reader"
    radius = 0
    max_disp = 0

    def __init__(self, domain):
        self.domain = domain
        self.target = domain

    def values(self, tape, rows, cols):
        return tape.at(rows, cols).astype(np.int64)

    def describe(self):
        return "read"


# --------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class Proof:
    engine: str
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"engine": self.engine, **self.detail}


class TfgElement:
    """A verified bijective cocycle program."""

    def __init__(self, program: Program, proof: Proof, label: str | None = None):
        self.program = program
        self.proof = proof
        self.label = label or program.describe()
        self._canonical = None

    @property
    def domain(self):
        return self.program.domain

    @property
    def radius(self):
        return self.program.radius

    @property
    def max_disp(self):
        return self.program.max_disp

    def __call__(self, x: EPC) -> EPC:
        return x.shift(evaluate(self.program, x))

    def __repr__(self):
        return f"TfgElement({self.label}, n={self.radius}, M={self.max_disp})"

    def __mul__(self, other):
        return compose(self, other)

    def __pow__(self, k: int):
        return power(self, k)


def evaluate(program, x: EPC) -> int:
    """Cocycle value at x, reading only coordinates in [-radius, radius]."""
    if isinstance(program, TfgElement):
        program = program.program
    r = program.radius
    row = x.window(-r, r)
    if not program.domain.contains(x, r):
        raise OffLanguage("configuration is not in the domain shift")
    return int(program.values(window_tape(row), np.array([0]), np.array([r]))[0])


def evaluate_many(program, xs) -> np.ndarray:
    if isinstance(program, TfgElement):
        program = program.program
    r = program.radius
    if not xs:
        return np.zeros(0, dtype=np.int64)
    rows = np.stack([x.window(-r, r) for x in xs])
    return program.values(window_tape(rows), all_rows_n(len(xs)), np.full(len(xs), r))


def all_rows_n(n):
    return np.arange(n, dtype=np.int64)


def table_from_function(domain: Domain, radius: int, fn, name=None) -> Table:
    """Table whose entry for window w (w[0] at offset -radius) is fn(w)."""
    k = domain.size
    dense = np.full(k ** (2 * radius + 1), _SENTINEL, dtype=np.int64)
    words = domain.words(2 * radius + 1)
    vals = np.array([fn(tuple(int(s) for s in w)) for w in words], dtype=np.int64)
    dense[_ranks(words, k)] = vals
    return Table(domain, radius, dense, name=name)


def identity(domain: Domain) -> TfgElement:
    t = Table(domain, 0, np.zeros(domain.size, dtype=np.int64), name="id")
    return TfgElement(t, Proof("by-definition"), "id")


def shift_element(domain: Domain, k: int = 1) -> TfgElement:
    t = Table(domain, 0, np.full(domain.size, k, dtype=np.int64), name=f"shift^{k}")
    return TfgElement(t, Proof("by-definition"), "shift" if k == 1 else f"shift^{k}")


def pi01_table(domain=None) -> Table:
    domain = domain or full_shift(2)

    def rule(w):
        if (w[1], w[2]) == (0, 1):
            return 1
        if (w[0], w[1]) == (0, 1):
            return -1
        return 0
    return table_from_function(domain, 1, rule, name="pi01")


def dial_table(q: int) -> Table:
    """Over {0..q-1}: +1 inside an aligned occurrence of 01..(q-1), wrapping at its end."""
    domain = full_shift(q)
    n = q - 1
    pattern = tuple(range(q))

    def rule(w):
        for j in range(q):
            seg = w[n - j:n - j + q]
            if seg == pattern:
                return 1 if j < q - 1 else -(q - 1)
        return 0
    return table_from_function(domain, n, rule, name=f"dial{q}")


# --------------------------------------------------------------------------
# algebra


def _same_domain(g, h):
    if g.domain != h.domain:
        raise DomainMismatch("elements live on different shifts")


def compose(g: TfgElement, h: TfgElement) -> TfgElement:
    """The element g∘h (apply h first)."""
    _same_domain(g, h)
    return TfgElement(Compose(g.program, h.program), Proof("inherited", {"from": "compose"}),
                      f"{g.label}*{h.label}")


def invert(g: TfgElement) -> TfgElement:
    return TfgElement(_inverse_program(g.program), Proof("inherited", {"from": "invert"}),
                      f"{g.label}^-1")


def _inverse_program(p: Program) -> Program:
    if isinstance(p, Table) and p.radius == 0:
        return Table(p.domain, 0, -p.entries, name=f"inv({p.describe()})")
    if isinstance(p, Compose):
        return Compose(_inverse_program(p.inner), _inverse_program(p.outer))
    if isinstance(p, Inverse):
        return p.inner
    if isinstance(p, Strided):
        return Strided(_inverse_program(p.inner), p.k)
    if isinstance(p, Simulate):
        return Simulate(_inverse_program(p.g), p.f, p.s, p.f_inv)
    if isinstance(p, Named) and p.inverse() is not None:
        return p.inverse()
    if hasattr(p, "inverse_program"):
        return p.inverse_program()
    return Inverse(p)


def power(g: TfgElement, k: int) -> TfgElement:
    if k == 0:
        return identity(g.domain)
    base = g if k > 0 else invert(g)
    out = base
    for _ in range(abs(k) - 1):
        out = compose(base, out)
    return out


def commutator(g: TfgElement, h: TfgElement) -> TfgElement:
    """[g, h] = g^-1 h^-1 g h."""
    return compose(invert(g), compose(invert(h), compose(g, h)))


def even_double(g: TfgElement) -> TfgElement:
    return TfgElement(Strided(g.program, 2), Proof("inherited", {"from": "even-double"}),
                      f"double({g.label})")


# --------------------------------------------------------------------------
# verification


@dataclass
class VerifyPolicy:
    budget: int = 1 << 22  # windows the exhaustive engine may tabulate
    chunk: int = 1 << 18


def exhaustive_cost(program: Program) -> int:
    """Number of windows the tabulating engine must evaluate."""
    return program.domain.count_words(2 * program.radius + 1)


def _chunks(domain, length, chunk):
    return domain.word_chunks(length, chunk)


def tabulate(program: Program):
    """Values of ``program`` on every admissible window of its radius.

    Evaluation runs on windows of exactly that radius, so a program that
    reads further than it certifies raises ``ReadOutOfWindow`` here.
    """
    d = program.domain
    n = program.radius
    words = d.words(2 * n + 1)
    t = window_tape(words)
    vals = program.values(t, all_rows(t), np.full(len(words), n))
    return words, vals


def check_exhaustive(program: Program, policy: VerifyPolicy | None = None) -> dict:
    """Exact bijectivity decision from the window table; raises on failure."""
    n, m = program.radius, program.max_disp
    d = program.domain
    k_ = d.size
    words, vals = tabulate(program)
    if vals.size and int(np.abs(vals).max()) > m:
        raise BoundsUnsound(f"value {int(np.abs(vals).max())} exceeds certified bound {m}")
    w = 2 * n + 1
    # injectivity: a collision inside one orbit needs c(x) - c(shift^k x) = k, |c| <= M
    span = 2 * m + 1
    for k in range(1, 2 * m + 1):
        o = w - k
        if o > 0:
            key1 = _ranks(words[:, k:], k_) * span + (vals + m)
            key2 = _ranks(words[:, :o], k_) * span + (vals + k + m)
            ok2 = np.abs(vals + k) <= m
            common = np.intersect1d(key1, key2[ok2])
            if common.size:
                c = common[0]
                i1 = np.flatnonzero(key1 == c)[0]
                i2 = np.flatnonzero((key2 == c) & ok2)[0]
                word = tuple(int(s) for s in words[i1]) + tuple(int(s) for s in words[i2][o:])
                raise NotInjective(f"collision at distance {k}", {"word": word, "k": k, "offset": -n})
        else:
            gap = -o
            reach = _reach(d, gap + 1)
            for i1 in np.argsort(_ranks(words, k_), kind="stable"):
                hits = np.flatnonzero((vals == vals[i1] - k) & reach[words[i1, -1], words[:, 0]])
                if hits.size:
                    w2 = words[hits[0]]
                    bridge = _bridge(d, int(words[i1, -1]), int(w2[0]), gap)
                    word = tuple(int(s) for s in words[i1]) + bridge + tuple(int(s) for s in w2)
                    raise NotInjective(f"collision at distance {k}",
                                       {"word": word, "k": k, "offset": -n})
    try:
        _check_onto(program, words, vals)
    except NotSurjective as exc:
        # injective orbit maps are onto; reaching here means a verifier bug
        raise InternalInconsistency(f"injective rule is not onto: {exc.witness}") from exc
    return {"engine": "exhaustive", "radius": n, "max_disp": m}


def _reach(d, steps):
    """reach[a, b]: a word a..b with ``steps`` transitions exists."""
    if isinstance(d, FullShift):
        return np.ones((d.size, d.size), dtype=bool)
    m = d.matrix.astype(np.int64)
    r = np.eye(d.size, dtype=np.int64)
    for _ in range(steps):
        r = (r @ m > 0).astype(np.int64)
    return r.astype(bool)


def _bridge(d, a, b, gap):
    if isinstance(d, FullShift):
        return (0,) * gap
    import itertools as it
    for u in it.product(range(d.size), repeat=gap):
        if d.admissible((a,) + u + (b,)):
            return u
    raise InternalInconsistency("no bridge")


def _check_onto(program, words, vals):
    """Every word of length 2(M+n)+1 has some k in [-M, M] with c@k = -k.

    Dynamic programme over the word from left to right; the state is the last
    2n symbols of partial words none of whose completed windows is a preimage.
    States are kept sparse, indexed by the admissible windows only.  Raises
    NotSurjective with a witness word otherwise.
    """
    n, m = program.radius, program.max_disp
    k_ = program.domain.size
    w = 2 * n + 1
    ranks = _ranks(words, k_)
    tail = k_ ** (w - 1)
    prefix, suffix = ranks // k_, ranks % tail
    states = np.unique(np.concatenate([prefix, suffix]))
    pre_idx = np.searchsorted(states, prefix)
    suf_idx = np.searchsorted(states, suffix)
    alive = np.ones(len(states), dtype=bool)
    bad = []
    for idx in range(2 * m + 1):
        k = idx - m
        bad_win = alive[pre_idx] & (vals != -k)
        alive = np.zeros(len(states), dtype=bool)
        alive[suf_idx[bad_win]] = True
        bad.append(bad_win)
    if not alive.any():
        return
    # backtrack the least surviving word
    state = int(np.flatnonzero(alive)[0])
    back = []
    for idx in range(2 * m, -1, -1):
        win = int(np.flatnonzero(bad[idx] & (suf_idx == state))[0])
        back.append(int(ranks[win] % k_))
        state = int(pre_idx[win])
    r = int(states[state])
    head = []
    for _ in range(w - 1):
        head.append(r % k_)
        r //= k_
    word = tuple(reversed(head)) + tuple(reversed(back))
    raise NotSurjective("point without preimage", {"word": word, "offset": -(m + n)})


def check_bruteforce(program: Program, policy: VerifyPolicy | None = None) -> dict:
    """Direct enumeration of every window (slow; kept as an oracle)."""
    policy = policy or VerifyPolicy()
    n, m = program.radius, program.max_disp
    d = program.domain
    seen_max = 0
    # injectivity: a collision inside one orbit needs c(x) - c(shift^k x) = k, |c| <= M
    for k in range(1, 2 * m + 1):
        length = k + 2 * n + 1
        for words in _chunks(d, length, policy.chunk):
            t = window_tape(words)
            rows = all_rows(t)
            v0 = program.values(t, rows, np.full(len(rows), n))
            vk = program.values(t, rows, np.full(len(rows), n + k))
            seen_max = max(seen_max, int(np.abs(v0).max(initial=0)), int(np.abs(vk).max(initial=0)))
            bad = np.flatnonzero(v0 == k + vk)
            if bad.size:
                w = tuple(int(s) for s in words[bad[0]])
                raise NotInjective(f"collision at distance {k}", {"word": w, "k": k, "offset": -n})
    if seen_max > m:
        raise BoundsUnsound(f"value {seen_max} exceeds certified bound {m}")
    length = 2 * (m + n) + 1
    for words in _chunks(d, length, policy.chunk):
        t = window_tape(words)
        rows = all_rows(t)
        hit = np.zeros(len(rows), dtype=bool)
        for k in range(-m, m + 1):
            v = program.values(t, rows, np.full(len(rows), m + n + k))
            seen_max = max(seen_max, int(np.abs(v).max(initial=0)))
            hit |= v == -k
        if seen_max > m:
            raise BoundsUnsound(f"value {seen_max} exceeds certified bound {m}")
        miss = np.flatnonzero(~hit)
        if miss.size:
            w = tuple(int(s) for s in words[miss[0]])
            # injective orbit maps are onto; a miss here means a verifier bug
            raise InternalInconsistency(f"injective rule failed surjectivity at {w}")
    return {"engine": "bruteforce", "radius": n, "max_disp": m}


def check_configuration(program: Program, x: EPC) -> None:
    """Exact bijectivity of the orbit graph on the orbit of one configuration."""
    r, m = program.radius, program.max_disp
    lp, rp = len(x.left), len(x.right)
    lo = x.start - r - 2 * m - 2 * lp
    hi = x.end + r + 2 * m + 2 * rp
    row = x.window(lo - r, hi + r)
    t = window_tape(row)
    cols = np.arange(r, r + hi - lo + 1)
    vals = program.values(t, np.zeros(len(cols), dtype=np.int64), cols)
    targets = np.arange(lo, hi + 1) + vals
    inner_lo, inner_hi = lo + m, hi - m
    if x.is_periodic():
        p = lp
        t = cyclic_tape(np.asarray(x.left, dtype=np.uint8))
        v = program.values(t, np.zeros(p, dtype=np.int64), np.arange(p))
        if len(np.unique((np.arange(p) + v) % p)) != p:
            raise NotInjective("periodic configuration is not permuted", {"config": x})
        return
    sel = (targets >= inner_lo) & (targets <= inner_hi)
    counts = np.bincount(targets[sel] - inner_lo, minlength=inner_hi - inner_lo + 1)
    if (counts > 1).any():
        j = int(np.flatnonzero(counts > 1)[0]) + inner_lo
        raise NotInjective("two positions of one orbit collide", {"config": x, "target": j})
    if (counts == 0).any():
        j = int(np.flatnonzero(counts == 0)[0]) + inner_lo
        raise NotSurjective("position with no preimage", {"config": x, "target": j})


def check_scenes(program: Named) -> dict:
    scenes = program.scenes() if callable(program.scenes) else program.scenes
    count = 0
    for x in scenes:
        check_configuration(program, x)
        count += 1
    return {"engine": "scenes", "configurations": count}


def verify_bijective(program, policy: VerifyPolicy | None = None, label=None) -> TfgElement:
    """Certify bijectivity; exhaustive when affordable, else structural."""
    if isinstance(program, TfgElement):
        program = program.program
    policy = policy or VerifyPolicy()
    detail = _verify(program, policy)
    return TfgElement(program, Proof(detail.pop("engine"), detail), label)


def _verify(program, policy) -> dict:
    if exhaustive_cost(program) <= policy.budget:
        return check_exhaustive(program, policy)
    if isinstance(program, Named):
        if program.scenes is None:
            raise SearchBudgetExceeded(f"{program.name}: windows too many and no scene family")
        return check_scenes(program)
    if isinstance(program, (Compose, Strided, Inverse)):
        return {"engine": "inherited", "parts": [_verify(p, policy) for p in program.parts()]}
    if isinstance(program, Simulate):
        return {"engine": "inherited",
                "parts": [_verify(program.g, policy), _verify(program.f, policy)]}
    raise SearchBudgetExceeded("rule too large for exhaustive verification")


def periodic_map(program, p: int, words=None):
    """Image indices of the p-periodic pointed words; returns (words, image)."""
    if isinstance(program, TfgElement):
        program = program.program
    words = program.domain.periodic_words(p) if words is None else words
    if len(words) == 0:
        return words, np.zeros(0, dtype=np.int64)
    t = cyclic_tape(words)
    v = program.values(t, all_rows(t), np.zeros(len(words), dtype=np.int64))
    shifted = np.take_along_axis(words, (np.arange(p)[None, :] + v[:, None]) % p, axis=1)
    k = program.domain.size
    ranks = _ranks(words, k)
    order = np.argsort(ranks)
    pos = np.searchsorted(ranks[order], _ranks(shifted, k))
    image = order[np.clip(pos, 0, len(order) - 1)]
    return words, image


def periodic_permutation(g, p: int) -> np.ndarray:
    words, image = periodic_map(g, p)
    if len(np.unique(image)) != len(image):
        raise InternalInconsistency(f"element does not permute the {p}-periodic points")
    return image


def permutes_periodic(program, p: int) -> bool:
    _, image = periodic_map(program, p)
    return len(np.unique(image)) == len(image)


# --------------------------------------------------------------------------
# equality


def _default_exhaustive_radius(k: int) -> int:
    return {2: 6, 3: 4, 4: 4}.get(k, 2)


@dataclass
class EqualityPolicy:
    exhaustive_radius: int | None = None
    period_bound: int = 12
    samples: int = 100_000
    seed: int = 0
    sampler: object = None  # callable(rng, count) -> list[EPC]
    chunk: int = 1 << 18

    def radius_for(self, domain) -> int:
        if self.exhaustive_radius is not None:
            return self.exhaustive_radius
        return _default_exhaustive_radius(domain.size)

    def to_json(self):
        return {"exhaustive_radius": self.exhaustive_radius, "period_bound": self.period_bound,
                "samples": self.samples, "seed": self.seed}


@dataclass
class Verdict:
    equal: bool
    tier: str
    exact: bool
    witness: object = None

    def __bool__(self):
        return self.equal


def equal(g: TfgElement, h: TfgElement, policy: EqualityPolicy | None = None) -> Verdict:
    _same_domain(g, h)
    policy = policy or EqualityPolicy()
    a, b = g.program, h.program
    r = max(a.radius, b.radius)
    d = g.domain
    if r <= policy.radius_for(d):
        length = 2 * r + 1
        for words in d.word_chunks(length, policy.chunk):
            t = window_tape(words)
            rows = all_rows(t)
            c = np.full(len(rows), r)
            diff = np.flatnonzero(a.values(t, rows, c) != b.values(t, rows, c))
            if diff.size:
                return Verdict(False, "E", True, {"word": tuple(int(s) for s in words[diff[0]]),
                                                  "offset": -r})
        return Verdict(True, "E", True)
    w = differ_on_periodic(a, b, policy.period_bound, policy.chunk)
    if w is not None:
        return Verdict(False, "P", True, w)
    if policy.samples:
        w = differ_on_samples(a, b, policy)
        if w is not None:
            return Verdict(False, "R", True, w)
        return Verdict(True, "R", False)
    return Verdict(True, "P", False)


def differ_on_periodic(a: Program, b: Program, period_bound: int, chunk: int = 1 << 18):
    d = a.domain
    for p in range(1, period_bound + 1):
        words = d.periodic_words(p)
        for lo in range(0, len(words), chunk):
            part = words[lo:lo + chunk]
            t = cyclic_tape(part)
            rows = all_rows(t)
            z = np.zeros(len(rows), dtype=np.int64)
            diff = np.flatnonzero((a.values(t, rows, z) - b.values(t, rows, z)) % p != 0)
            if diff.size:
                return {"config": EPC.periodic(part[diff[0]].tolist()), "period": p}
    return None


def random_configurations(domain, rng, count, max_period=4, max_center=24):
    from .sampling import random_epc
    return [random_epc(domain, rng, max_period, max_center) for _ in range(count)]


def differ_on_samples(a: Program, b: Program, policy: EqualityPolicy):
    rng = np.random.default_rng(policy.seed)
    sampler = policy.sampler or (lambda rng_, n: random_configurations(a.domain, rng_, n))
    r = max(a.radius, b.radius)
    if hasattr(sampler, "bulk"):
        # heads on shared long rows: one parse serves many samples
        for data, rows, cols in sampler.bulk(rng, policy.samples, r):
            t = Tape(data, cyclic=False)
            diff = np.flatnonzero(a.values(t, rows, cols) != b.values(t, rows, cols))
            if diff.size:
                c = int(cols[diff[0]])
                row = tuple(int(v) for v in data[rows[diff[0]], c - r:c + r + 1])
                return {"config": EPC((0,), row, (0,), -r)}
        return None
    left = policy.samples
    while left > 0:
        n = min(left, 5000)
        left -= n
        xs = sampler(rng, n)
        rows = np.stack([x.window(-r, r) for x in xs])
        t = window_tape(rows)
        idx = all_rows(t)
        c = np.full(n, r)
        diff = np.flatnonzero(a.values(t, idx, c) != b.values(t, idx, c))
        if diff.size:
            return {"config": xs[diff[0]]}
    return None


def is_identity(g: TfgElement, policy: EqualityPolicy | None = None) -> Verdict:
    return equal(g, identity(g.domain), policy)


# --------------------------------------------------------------------------
# canonical tables


def canonicalize(g, max_radius: int | None = None) -> Table:
    """Minimal-radius table equal to g (needs an affordable window count)."""
    program = g.program if isinstance(g, TfgElement) else g
    d = program.domain
    r = program.radius
    if d.count_words(2 * r + 1) > (1 << 24):
        raise SearchBudgetExceeded("radius too large to tabulate")
    words = d.words(2 * r + 1)
    t = window_tape(words)
    vals = program.values(t, all_rows(t), np.full(len(words), r))
    k = d.size
    while r > 0:
        inner = _ranks(words[:, 1:-1], k)
        order = np.argsort(inner, kind="stable")
        si, sv = inner[order], vals[order]
        boundaries = np.flatnonzero(np.diff(si)) + 1
        starts = np.concatenate([[0], boundaries])
        lo_v = np.minimum.reduceat(sv, starts)
        hi_v = np.maximum.reduceat(sv, starts)
        if (lo_v != hi_v).any():
            break
        words = words[order][starts][:, 1:-1]
        vals = lo_v
        r -= 1
    dense = np.full(k ** (2 * r + 1), _SENTINEL, dtype=np.int64)
    dense[_ranks(words, k)] = vals
    return Table(d, r, dense, name=f"canon(n={r})")


# --------------------------------------------------------------------------
# serialization


def table_to_json(table: Table) -> dict:
    words, vals = table.items()
    fmt = table.domain.alphabet.format
    return {"radius": table.radius, "domain": table.domain.describe(),
            "entries": {fmt(w): int(v) for w, v in zip(words, vals)}}


def table_from_json(obj: dict) -> Table:
    from .symbolic import domain_from_json
    d = domain_from_json(obj["domain"])
    entries = {d.alphabet.parse(w): int(v) for w, v in obj["entries"].items()}
    for w in entries:
        if not d.admissible(w):
            raise OffLanguage(f"table lists inadmissible window {w}")
    return Table(d, int(obj["radius"]), entries, obj.get("max_disp"))


def all_windows(domain, radius):
    return itertools.product(range(domain.size), repeat=2 * radius + 1)
