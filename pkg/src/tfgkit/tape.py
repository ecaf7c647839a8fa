"""Batches of configurations that cocycle programs are evaluated on.

A tape holds ``N`` rows of symbols.  Cyclic tapes are periodic points (reads
wrap modulo the row length); window tapes are finite windows and reading past
either edge raises ``ReadOutOfWindow``.  Heads are integer column arrays in
base coordinates; ``stride`` makes a tape a decimated view (used by doubling
and root embeddings).
"""

from __future__ import annotations

import numpy as np

from .errors import ReadOutOfWindow


class Tape:
    __slots__ = ("data", "cyclic", "stride", "cache")

    def __init__(self, data, cyclic: bool, stride: int = 1, cache=None):
        data = np.asarray(data, dtype=np.uint8)
        if data.ndim == 1:
            data = data[None, :]
        self.data = data
        self.cyclic = cyclic
        self.stride = stride
        self.cache = {} if cache is None else cache

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def view(self, k: int) -> "Tape":
        return Tape(self.data, self.cyclic, self.stride * k, self.cache)

    def advance(self, cols, k):
        return cols + self.stride * np.asarray(k, dtype=np.int64)

    def at(self, rows, cols):
        cols = np.asarray(cols, dtype=np.int64)
        if self.cyclic:
            return self.data[rows, cols % self.width]
        if cols.size and (cols.min() < 0 or cols.max() >= self.width):
            raise ReadOutOfWindow("read outside the materialized window")
        return self.data[rows, cols]

    def window(self, rows, cols, radius: int) -> np.ndarray:
        """Stack the symbols at offsets -radius..radius (in view steps)."""
        out = np.empty((len(rows), 2 * radius + 1), dtype=np.uint8)
        for j in range(-radius, radius + 1):
            out[:, j + radius] = self.at(rows, self.advance(cols, j))
        return out

    def check_span(self, cols, radius: int):
        if self.cyclic:
            return
        lo = np.min(cols) - radius * self.stride if len(cols) else 0
        hi = np.max(cols) + radius * self.stride if len(cols) else 0
        if lo < 0 or hi >= self.width:
            raise ReadOutOfWindow("read outside the materialized window")


def window_tape(rows) -> Tape:
    return Tape(np.asarray(rows, dtype=np.uint8), cyclic=False)


def cyclic_tape(rows) -> Tape:
    return Tape(np.asarray(rows, dtype=np.uint8), cyclic=True)


def all_rows(tape: Tape) -> np.ndarray:
    return np.arange(tape.rows, dtype=np.int64)
