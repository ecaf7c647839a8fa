"""Simulating one element along the orbits of another."""

from __future__ import annotations

from dataclasses import dataclass

from .cocycle import (Proof, Simulate, SymbolReader, TfgElement, _inverse_program, evaluate,
                      invert)
from .errors import DomainMismatch
from .symbolic import EPC, Alphabet


def simulate(g: TfgElement, f: TfgElement, s=None, label=None) -> TfgElement:
    """The element that runs g on the configuration read along f-orbits by s.

    With m = c_g(pi(x)) where pi(x)_i = s(f^i x), the result moves the head
    m steps along the f-orbit.  Bijective because g and f are.
    """
    s = s or SymbolReader(f.domain)
    target = getattr(s, "target", None)
    if target is None or target.size != g.domain.size:
        raise DomainMismatch("reader alphabet does not match the simulated element")
    prog = Simulate(g.program, f.program, s, _inverse_program(f.program))
    return TfgElement(prog, Proof("inherited", {"from": "simulate"}),
                      label or f"sim({g.label})")


@dataclass
class OrbitTrace:
    offsets: list
    symbols: list

    def to_json(self):
        return [{"step": i, "offset": o, "symbol": s}
                for i, (o, s) in enumerate(zip(self.offsets, self.symbols))]


def trace_orbit(g: TfgElement, x: EPC, steps: int) -> OrbitTrace:
    """Head offsets o_0 = 0, o_{t+1} = o_t + c(shift(x, o_t)); negative steps use g^-1."""
    h = g if steps >= 0 else invert(g)
    offsets = [0]
    for _ in range(abs(steps)):
        o = offsets[-1]
        offsets.append(o + evaluate(h.program, x.shift(o)))
    return OrbitTrace(offsets, [x.symbol_at(o) for o in offsets])


def render(x: EPC, heads: dict, lo: int, hi: int, alphabet: Alphabet | None = None) -> str:
    """ASCII strip of x on [lo, hi] with labelled head markers underneath.

    ``heads`` maps a label (single character preferred) to a coordinate.
    """
    names = alphabet.names if alphabet else None
    cells = [(names[s] if names else str(s)) for s in x.window(lo, hi).tolist()]
    width = max(len(c) for c in cells)
    line = " ".join(c.rjust(width) for c in cells)
    marks = [" " * width] * len(cells)
    for label, pos in heads.items():
        if lo <= pos <= hi:
            marks[pos - lo] = str(label)[:width].rjust(width)
    origin = [" " * width] * len(cells)
    if lo <= 0 <= hi:
        origin[-lo] = "^".rjust(width)
    return "\n".join([line, " ".join(origin).rstrip(), " ".join(marks).rstrip()])
