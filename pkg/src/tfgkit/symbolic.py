"""Alphabets, eventually periodic configurations, shift spaces and codebooks."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import CodebookOverflow, InvalidCodebook, OffLanguage, UsageError


@dataclass(frozen=True)
class Alphabet:
    size: int
    names: tuple = ()

    def __post_init__(self):
        if self.size < 2:
            raise UsageError("alphabets need at least two symbols")
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i) for i in range(self.size)))
        if len(self.names) != self.size or len(set(self.names)) != self.size:
            raise UsageError("alphabet names must be distinct, one per symbol")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UsageError(f"unknown symbol {name!r}") from None

    def parse(self, text: str) -> tuple:
        return tuple(self.index(ch) for ch in text)

    def format(self, word: Iterable[int]) -> str:
        return "".join(self.names[s] for s in word)


def _primitive_root(word: tuple) -> tuple:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _rotate(word: tuple, k: int) -> tuple:
    k %= len(word)
    return word[k:] + word[:k]


class EPC:
    """Eventually periodic configuration.

    ``center`` occupies coordinates ``start .. start+len(center)-1``; the left
    tail ends at ``start-1`` with ``left[-1]`` and the right tail begins at
    ``start+len(center)`` with ``right[0]``.
    """

    __slots__ = ("left", "center", "right", "start")

    def __init__(self, left, center=(), right=None, start: int = 0):
        left = tuple(int(s) for s in left)
        right = left if right is None else tuple(int(s) for s in right)
        if not left or not right:
            raise UsageError("tail periods must be nonempty")
        self.left, self.center, self.right, self.start = _normalize(
            left, tuple(int(s) for s in center), right, int(start))

    @classmethod
    def periodic(cls, word, phase: int = 0) -> "EPC":
        """The point with x_i = word[(i + phase) mod len(word)]."""
        word = tuple(word)
        return cls(_rotate(word, phase), (), _rotate(word, phase), 0)

    @property
    def end(self) -> int:
        return self.start + len(self.center)

    def symbol_at(self, i: int) -> int:
        if i < self.start:
            return self.left[(i - self.start) % len(self.left)]
        if i >= self.end:
            return self.right[(i - self.end) % len(self.right)]
        return self.center[i - self.start]

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at coordinates lo..hi inclusive."""
        idx = np.arange(lo, hi + 1)
        out = np.empty(idx.size, dtype=np.uint8)
        m = idx < self.start
        out[m] = np.asarray(self.left, dtype=np.uint8)[(idx[m] - self.start) % len(self.left)]
        m2 = idx >= self.end
        out[m2] = np.asarray(self.right, dtype=np.uint8)[(idx[m2] - self.end) % len(self.right)]
        mid = ~(m | m2)
        if mid.any():
            out[mid] = np.asarray(self.center, dtype=np.uint8)[idx[mid] - self.start]
        return out

    def shift(self, k: int) -> "EPC":
        return EPC(self.left, self.center, self.right, self.start - k)

    def is_periodic(self) -> bool:
        return not self.center and len(self.left) == len(self.right) and self.left == self.right

    def period(self):
        return len(self.left) if self.is_periodic() else None

    def _key(self):
        return (self.left, self.center, self.right, self.start)

    def __eq__(self, other):
        return isinstance(other, EPC) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"EPC({self.left}, {self.center}, {self.right}, start={self.start})"

    def to_literal(self, alphabet: Alphabet | None = None) -> str:
        fmt = alphabet.format if alphabet else (lambda w: "".join(str(s) for s in w))
        lo = min(self.start, 0)
        hi = max(self.end, 0)
        before = fmt(self.window(lo, -1)) if lo < 0 else ""
        after = fmt(self.window(0, hi - 1)) if hi > 0 else ""
        # tails re-anchored so they meet the written window
        left = _rotate(self.left, (lo - self.start) % len(self.left))
        right = _rotate(self.right, (hi - self.end) % len(self.right))
        return f"({fmt(left)})* {before} . {after} ({fmt(right)})*".replace("  ", " ")


def _normalize(left, center, right, start):
    left = _primitive_root(left)
    right = _primitive_root(right)
    # absorb center symbols into the tails
    while center and center[0] == left[0]:
        center = center[1:]
        left = left[1:] + left[:1]
        start += 1
    while center and center[-1] == right[-1]:
        center = center[:-1]
        right = right[-1:] + right[:-1]
    if center:
        return left, center, right, start
    # empty center: purely periodic, or a boundary that can slide
    if left == right:
        k = (-start) % len(left)
        word = _rotate(left, k)
        return word, (), word, 0
    guard = len(left) * len(right) + 1
    while left[-1] == right[-1] and guard:
        # slide boundary one step to the left
        right = right[-1:] + right[:-1]
        left = left[-1:] + left[:-1]
        start -= 1
        guard -= 1
    return left, (), right, start


_LITERAL = re.compile(r"^\s*\((?P<left>[^()]*)\)\s*(\*|\^inf)\s*(?P<pre>[^().]*)\.(?P<post>[^()]*)"
                      r"\((?P<right>[^()]*)\)\s*(\*|\^inf)\s*$")


def parse_configuration(text: str, alphabet: Alphabet) -> EPC:
    """Parse ``"(L)* C . D (R)*"``; the origin is the first symbol after the dot."""
    m = _LITERAL.match(text)
    if not m:
        raise UsageError(f"malformed configuration literal {text!r}")
    parts = {k: alphabet.parse(re.sub(r"\s+", "", v)) for k, v in m.groupdict().items()}
    if not parts["left"] or not parts["right"]:
        raise UsageError("tail periods must be nonempty")
    pre = parts["pre"]
    return EPC(parts["left"], pre + parts["post"], parts["right"], -len(pre))


# --------------------------------------------------------------------------
# shift spaces


def _all_words(k: int, length: int) -> np.ndarray:
    n = k ** length
    idx = np.arange(n, dtype=np.int64)
    out = np.empty((n, length), dtype=np.uint8)
    for j in range(length - 1, -1, -1):
        out[:, j] = idx % k
        idx //= k
    return out


def words_in_range(k: int, length: int, lo: int, hi: int) -> np.ndarray:
    """Full-shift words with lexicographic rank in [lo, hi)."""
    idx = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((idx.size, length), dtype=np.uint8)
    for j in range(length - 1, -1, -1):
        out[:, j] = idx % k
        idx //= k
    return out


class Domain:
    alphabet: Alphabet

    @property
    def size(self) -> int:
        return self.alphabet.size

    def count_words(self, length: int) -> int:
        raise NotImplementedError

    def words(self, length: int) -> np.ndarray:
        raise NotImplementedError

    def word_chunks(self, length: int, chunk: int = 1 << 20):
        n = self.count_words(length)
        if n <= chunk:
            yield self.words(length)
            return
        yield from self._chunks(length, chunk)

    def _chunks(self, length, chunk):
        yield self.words(length)

    def periodic_words(self, p: int) -> np.ndarray:
        raise NotImplementedError

    def admissible(self, word: Sequence[int]) -> bool:
        raise NotImplementedError

    def check(self, word: Sequence[int]):
        if not self.admissible(word):
            raise OffLanguage(f"word {tuple(word)} is not admissible")

    def contains(self, x: EPC, margin: int = 0) -> bool:
        lo = x.start - 2 * len(x.left) - margin
        hi = x.end + 2 * len(x.right) + margin
        return self.admissible(x.window(lo, hi).tolist())


@dataclass(frozen=True, eq=True)
class FullShift(Domain):
    alphabet: Alphabet

    def count_words(self, length):
        return self.size ** length

    def words(self, length):
        return _all_words(self.size, length)

    def _chunks(self, length, chunk):
        n = self.count_words(length)
        for lo in range(0, n, chunk):
            yield words_in_range(self.size, length, lo, min(n, lo + chunk))

    def periodic_words(self, p):
        return _all_words(self.size, p)

    def admissible(self, word):
        return all(0 <= s < self.size for s in word)

    def describe(self):
        return {"kind": "full", "alphabet": list(self.alphabet.names)}


def full_shift(k: int) -> FullShift:
    return FullShift(Alphabet(k))


@dataclass(frozen=True, eq=True)
class VertexShift(Domain):
    """Vertex shift; the adjacency matrix is pruned to essential form."""

    alphabet: Alphabet
    adjacency: tuple = field(default=())
    transitive: bool = False

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.shape != (self.alphabet.size, self.alphabet.size):
            raise UsageError("adjacency must be square and match the alphabet")
        alive = np.ones(len(adj), dtype=bool)
        while True:
            sub = adj & alive[:, None] & alive[None, :]
            keep = alive & sub.any(axis=1) & sub.any(axis=0)
            if (keep == alive).all():
                break
            alive = keep
        adj = adj & alive[:, None] & alive[None, :]
        if not alive.any():
            raise UsageError("vertex shift is empty")
        object.__setattr__(self, "adjacency", tuple(tuple(bool(v) for v in row) for row in adj))
        if self.transitive and not self.is_transitive():
            raise UsageError("vertex shift flagged transitive is not strongly connected")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.adjacency, dtype=bool)

    @property
    def live_symbols(self):
        m = self.matrix
        return [a for a in range(self.size) if m[a].any()]

    def allowed(self, a: int, b: int) -> bool:
        return self.adjacency[a][b]

    def admissible(self, word):
        if any(not (0 <= s < self.size) for s in word):
            return False
        if len(word) == 1:
            return bool(self.matrix[word[0]].any())
        return all(self.adjacency[a][b] for a, b in zip(word, word[1:]))

    def is_transitive(self) -> bool:
        live = self.live_symbols
        m = self.matrix.astype(np.int64)
        reach = m.copy()
        for _ in range(self.size):
            reach = ((reach + reach @ m) > 0).astype(np.int64)
        return all(reach[a, b] for a in live for b in live)

    def count_words(self, length):
        if length == 0:
            return 1
        m = self.matrix.astype(object)
        v = np.array([1 if self.matrix[a].any() else 0 for a in range(self.size)], dtype=object)
        for _ in range(length - 1):
            v = m.dot(v)
        return int(sum(v))

    def words(self, length):
        if length == 0:
            return np.zeros((1, 0), dtype=np.uint8)
        cur = np.array(self.live_symbols, dtype=np.uint8)[:, None]
        succ = [np.flatnonzero(row).astype(np.uint8) for row in self.matrix]
        for _ in range(length - 1):
            counts = np.array([len(succ[a]) for a in cur[:, -1]])
            rep = np.repeat(cur, counts, axis=0)
            nxt = np.concatenate([succ[a] for a in cur[:, -1]]) if len(cur) else np.zeros(0, np.uint8)
            cur = np.concatenate([rep, nxt[:, None]], axis=1)
        return cur

    def periodic_words(self, p):
        w = self.words(p)
        m = self.matrix
        if len(w) == 0:
            return w
        ok = m[w[:, -1], w[:, 0]]
        return w[ok]

    def successors(self, a):
        return [b for b in range(self.size) if self.adjacency[a][b]]

    def shortest_bridge(self, a: int, b: int) -> tuple:
        """Shortest, then lexicographically least, word u with a u b admissible."""
        for n in range(0, self.size + 1):
            for u in itertools.product(range(self.size), repeat=n):
                if self.admissible((a,) + u + (b,)):
                    return u
        raise UsageError(f"no path from {a} to {b}")

    def describe(self):
        return {"kind": "vertex", "alphabet": list(self.alphabet.names),
                "adjacency": [[int(v) for v in row] for row in self.adjacency]}


def golden_mean() -> VertexShift:
    return VertexShift(Alphabet(2), ((True, True), (True, False)), transitive=True)


def admissible(domain: Domain, word: Sequence[int]) -> bool:
    return domain.admissible(tuple(word))


def enumerate_periodic(domain: Domain, p: int) -> np.ndarray:
    """All words w with w^Z admissible; row w is the pointed point with x_0 = w[0]."""
    return domain.periodic_words(p)


def domain_from_json(obj) -> Domain:
    names = tuple(str(n) for n in obj["alphabet"])
    alphabet = Alphabet(len(names), names)
    if obj.get("kind", "vertex" if "adjacency" in obj else "full") == "full":
        return FullShift(alphabet)
    adj = tuple(tuple(bool(v) for v in row) for row in obj["adjacency"])
    return VertexShift(alphabet, adj, bool(obj.get("transitive", False)))


# --------------------------------------------------------------------------
# codebooks


def find_border(words: Sequence[Sequence[int]]):
    """Return (t, w, w2) with t a nonempty suffix of w and prefix of w2, where
    t is a proper part of at least one of them; None if unbordered."""
    words = [tuple(w) for w in words]
    for w in words:
        if not w:
            raise InvalidCodebook("empty word in codebook")
    for w in words:
        for w2 in words:
            for n in range(1, min(len(w), len(w2)) + 1):
                if w[-n:] == w2[:n] and not (n == len(w) == len(w2) and w == w2):
                    return w[-n:], w, w2
    return None


def check_mutually_unbordered(words):
    found = find_border(words)
    return (True, None) if found is None else (False, found[0])


def _gamma(n: int) -> list:
    assert n >= 1
    bits = bin(n)[2:]
    return [0] * (len(bits) - 1) + [int(b) for b in bits]


def _enc(bits) -> list:
    out = []
    for b in bits:
        out.extend((1, 0) if b else (0,))
    return out


class CanonicalCoding:
    """Self-delimiting codewords ``110 + enc(payload)`` over the symbols 0 and 1.

    ``enc`` writes bit 0 as ``0`` and bit 1 as ``10``, so ``11`` occurs only at
    the start and every word ends with ``0``.  Payload: gamma(u+1), gamma(a),
    gamma(b), then the symbols of v in fixed width, zero padded up to
    ``min_length``.
    """

    MARKER = (1, 1, 0)

    def __init__(self, vertices: Sequence[int], max_cells, theta_sizes, min_length=None):
        self.vertices = list(vertices)
        self.vertex_set = set(self.vertices)
        self.max_cells = dict(max_cells) if not isinstance(max_cells, int) else \
            {u: max_cells for u in self.vertices}
        self.theta_sizes = dict(theta_sizes) if not isinstance(theta_sizes, int) else \
            {u: theta_sizes for u in self.vertices}
        self.widths = {u: max(1, (self.theta_sizes[u] - 1).bit_length()) for u in self.vertices}
        self.min_length = min_length or (lambda key: key[1] + key[2])

    def _payload(self, key):
        u, a, b, v = key
        bits = _gamma(u + 1) + _gamma(a) + _gamma(b)
        w = self.widths[u]
        for s in v:
            bits.extend((s >> (w - 1 - j)) & 1 for j in range(w))
        return bits

    def validate(self, key):
        u, a, b, v = key
        if u not in self.vertex_set:
            raise UsageError(f"unknown vertex {u}")
        if not (1 <= a <= self.max_cells[u] and 1 <= b <= self.max_cells[u]):
            raise UsageError(f"cell counts {(a, b)} out of range for vertex {u}")
        if len(v) != a + b or any(not 0 <= s < self.theta_sizes[u] for s in v):
            raise UsageError("v must list a+b symbols of the vertex alphabet")

    def encode(self, key) -> tuple:
        key = (key[0], key[1], key[2], tuple(key[3]))
        self.validate(key)
        word = list(self.MARKER) + _enc(self._payload(key))
        word += [0] * max(0, self.min_length(key) - len(word))
        return tuple(word)

    def max_length(self) -> int:
        best = 0
        for u in self.vertices:
            c = self.max_cells[u]
            top = (1 << self.widths[u]) - 1
            key_len = 3 + 2 * len(_gamma(u + 1)) + 4 * len(_gamma(c)) + 2 * 2 * c * self.widths[u]
            best = max(best, key_len, self.min_length((u, c, c, (top,) * (2 * c))))
        return best

    def decode_at(self, seq, pos: int):
        """Decode a codeword starting at ``pos`` of ``seq``; (key, length) or None."""
        n = len(seq)
        if pos + 3 > n or seq[pos] != 1 or seq[pos + 1] != 1 or seq[pos + 2] != 0:
            return None
        i = pos + 3

        def bit():
            nonlocal i
            if i >= n:
                raise IndexError
            s = seq[i]
            if s == 0:
                i += 1
                return 0
            if s == 1 and i + 1 < n and seq[i + 1] == 0:
                i += 2
                return 1
            raise ValueError

        def gamma():
            z = 0
            while True:
                if bit():
                    break
                z += 1
                if z > 24:
                    raise ValueError
            val = 1
            for _ in range(z):
                val = 2 * val + bit()
            return val

        try:
            u = gamma() - 1
            if u not in self.vertex_set:
                return None
            a = gamma()
            b = gamma()
            cap = self.max_cells[u]
            if not (1 <= a <= cap and 1 <= b <= cap):
                return None
            w = self.widths[u]
            v = []
            for _ in range(a + b):
                s = 0
                for _ in range(w):
                    s = 2 * s + bit()
                if s >= self.theta_sizes[u]:
                    return None
                v.append(s)
        except (IndexError, ValueError):
            return None
        key = (u, a, b, tuple(v))
        length = max(i - pos, self.min_length(key))
        if pos + length > n:
            return None
        if any(seq[j] != 0 for j in range(i, pos + length)):
            return None
        return key, length


class IndexCoding:
    """Codewords ``110 + enc(gamma(i+1))`` for an enumerated tag list."""

    def __init__(self, tags: Sequence[Hashable], min_length: int = 0):
        self.tags = list(tags)
        self.index = {t: i for i, t in enumerate(self.tags)}
        self.min_length = min_length

    def encode(self, tag):
        word = list(CanonicalCoding.MARKER) + _enc(_gamma(self.index[tag] + 1))
        word += [0] * max(0, self.min_length - len(word))
        return tuple(word)


class Codebook:
    def __init__(self, entries: dict, alphabet: Alphabet, verify: bool = True):
        self.entries = {k: tuple(w) for k, w in entries.items()}
        self.alphabet = alphabet
        if not self.entries:
            raise InvalidCodebook("codebook is empty")
        for w in self.entries.values():
            if not w:
                raise InvalidCodebook("empty codeword")
            if any(not 0 <= s < alphabet.size for s in w):
                raise InvalidCodebook("codeword symbol outside the alphabet")
        if verify:
            found = find_border(list(self.entries.values()))
            if found is not None:
                raise InvalidCodebook(f"codewords are bordered by {found[0]}")
        self.by_word = {w: k for k, w in self.entries.items()}
        if len(self.by_word) != len(self.entries):
            raise InvalidCodebook("duplicate codewords")
        self.lengths = sorted({len(w) for w in self.by_word})

    def __getitem__(self, key):
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    def match_at(self, seq, pos):
        for n in self.lengths:
            if pos + n <= len(seq):
                key = self.by_word.get(tuple(seq[pos:pos + n]))
                if key is not None:
                    return key, n
        return None

    def to_json(self):
        return {str(k): self.alphabet.format(w) for k, w in self.entries.items()}

    @classmethod
    def from_json(cls, obj: dict, alphabet: Alphabet):
        return cls({k: alphabet.parse(w) for k, w in obj.items()}, alphabet)


def generate_codebook(alphabet: Alphabet, keys, min_lengths=None, max_length: int | None = None) -> Codebook:
    """Canonical codebook for (u, a, b, v) tags or arbitrary hashable tags."""
    keys = list(keys)
    if alphabet.size < 2:
        raise UsageError("need at least two symbols")
    if isinstance(min_lengths, int):
        fixed = min_lengths
        min_lengths = lambda key: fixed  # noqa: E731
    structured = all(isinstance(k, tuple) and len(k) == 4 for k in keys)
    if structured:
        vertices = sorted({k[0] for k in keys})
        cap = {u: max(max(k[1], k[2]) for k in keys if k[0] == u) for u in vertices}
        theta = {u: max(2, 1 + max((max(k[3]) for k in keys if k[0] == u and len(k[3])), default=1))
                 for u in vertices}
        base = (lambda key: key[1] + key[2])
        ml = (lambda key: max(base(key), min_lengths(key))) if min_lengths else base
        coding = CanonicalCoding(vertices, cap, theta, ml)
        entries = {k: coding.encode(k) for k in keys}
    else:
        coding = IndexCoding(keys)
        entries = {}
        for k in keys:
            w = coding.encode(k)
            extra = min_lengths(k) if min_lengths else 0
            entries[k] = w + (0,) * max(0, extra - len(w))
    if max_length is not None and any(len(w) > max_length for w in entries.values()):
        raise CodebookOverflow(f"{len(keys)} keys do not fit in words of length {max_length}")
    return Codebook(entries, alphabet)
