"""Random eventually periodic configurations."""

from __future__ import annotations

import numpy as np

from .symbolic import EPC, FullShift, VertexShift


def _walk(shift: VertexShift, rng, first, length):
    out = [first]
    m = shift.matrix
    while len(out) < length:
        nxt = np.flatnonzero(m[out[-1]])
        out.append(int(rng.choice(nxt)))
    return out


def _cycle(shift: VertexShift, rng, max_len):
    # random walk closed by a shortest return path
    live = shift.live_symbols
    start = int(rng.choice(live))
    walk = _walk(shift, rng, start, int(rng.integers(1, max_len + 1)))
    bridge = shift.shortest_bridge(walk[-1], start)
    return tuple(walk) + tuple(bridge)


def random_epc(domain, rng, max_period=4, max_center=24) -> EPC:
    if hasattr(domain, "random_epc"):
        return domain.random_epc(rng, max_period, max_center)
    if isinstance(domain, FullShift):
        k = domain.size
        left = rng.integers(0, k, int(rng.integers(1, max_period + 1)))
        right = rng.integers(0, k, int(rng.integers(1, max_period + 1)))
        n = int(rng.integers(0, max_center + 1))
        center = rng.integers(0, k, n)
        return EPC(left, center, right, -int(rng.integers(0, n + 1)))
    if isinstance(domain, VertexShift):
        left = _cycle(domain, rng, max_period)
        right = _cycle(domain, rng, max_period)
        n = int(rng.integers(1, max_center + 1))
        nxt = np.flatnonzero(domain.matrix[left[-1]])
        mid = _walk(domain, rng, int(rng.choice(nxt)), n)
        mid = mid + list(domain.shortest_bridge(mid[-1], right[0]))
        return EPC(left, mid, right, -int(rng.integers(0, len(mid) + 1)))
    raise TypeError(f"no sampler for {domain!r}")


def random_periodic(domain, rng, p: int) -> EPC:
    words = domain.periodic_words(p)
    return EPC.periodic(words[int(rng.integers(0, len(words)))].tolist())


class TokenSampler:
    """Random rows built from tokens, zero gaps and junk.

    Subclasses supply ``random_token(rng)``; ``junk`` is the alphabet size for
    unstructured stretches.
    """

    token_share = 0.7
    gap_share = 0.15

    def __init__(self, junk: int = 2):
        self.junk = junk

    def random_token(self, rng):
        raise NotImplementedError

    def random_body(self, rng, length):
        out = []
        while len(out) < length:
            roll = rng.random()
            if roll < self.token_share:
                out.extend(self.random_token(rng))
            elif roll < self.token_share + self.gap_share:
                out.extend([0] * int(rng.integers(1, 4)))
            else:
                out.extend(int(s) for s in rng.integers(0, self.junk, int(rng.integers(1, 6))))
        return out[:length]

    def bulk(self, rng, count, radius, per_row=2000, spacing=16):
        """Yield (data, rows, cols) batches covering ``count`` heads."""
        left = count
        while left > 0:
            n = min(left, per_row)
            left -= n
            width = n * spacing + 2 * radius + 1
            data = np.array([self.random_body(rng, width)], dtype=np.uint8)
            cols = np.sort(rng.integers(radius, width - radius, n))
            yield data, np.zeros(n, dtype=np.int64), cols

    def periodic_rows(self, rng, count, max_tokens=3):
        out = []
        for _ in range(count):
            body = []
            for _ in range(int(rng.integers(1, max_tokens + 1))):
                body.extend(self.random_token(rng))
                if rng.random() < 0.3:
                    body.extend([0] * int(rng.integers(1, 3)))
            out.append(EPC.periodic(body))
        return out

    def epcs(self, rng, count):
        out = []
        for _ in range(count):
            tails = []
            for _ in range(2):
                if rng.random() < 0.3:
                    tails.append(tuple(self.random_token(rng)))
                else:
                    tails.append(tuple(int(s) for s in
                                       rng.integers(0, self.junk, int(rng.integers(1, 3)))))
            body = self.random_body(rng, int(rng.integers(10, 200)))
            out.append(EPC(tails[0], body, tails[1], -int(rng.integers(0, len(body)))))
        return out

    def __call__(self, rng, count):
        return self.epcs(rng, count)


def identity_on_bulk(elements, sampler, rng, count):
    """Check every element is the identity on ``count`` sampled heads.

    Heads share rows, so each row is parsed once for all elements.  Returns
    a witness dict or None.
    """
    from .tape import Tape
    radius = max(e.radius for e in elements)
    for data, rows, cols in sampler.bulk(rng, count, radius):
        tape = Tape(data, cyclic=False)
        for e in elements:
            v = e.program.values(tape, rows, cols)
            bad = np.flatnonzero(v != 0)
            if bad.size:
                c = int(cols[bad[0]])
                x = EPC((0,), tuple(int(s) for s in data[0, c - radius:c + radius + 1]), (0,),
                        -radius)
                return {"element": e.label, "config": x.to_literal(), "value": int(v[bad[0]])}
    return None


def identity_on_periodic(elements, configs):
    """Check every element fixes each purely periodic configuration in ``configs``."""
    from .tape import cyclic_tape
    by_len = {}
    for x in configs:
        by_len.setdefault(len(x.left), []).append(x.left)
    for p, words in by_len.items():
        tape = cyclic_tape(np.array(words, dtype=np.uint8))
        rows = np.repeat(np.arange(len(words)), p)
        cols = np.tile(np.arange(p), len(words))
        for e in elements:
            bad = np.flatnonzero(e.program.values(tape, rows, cols) % p != 0)
            if bad.size:
                return {"element": e.label,
                        "config": EPC.periodic(words[rows[bad[0]]]).shift(int(cols[bad[0]]))
                        .to_literal()}
    return None
