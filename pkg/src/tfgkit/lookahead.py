"""Look-ahead and periodic look-ahead certificates.

A look-ahead certificate is a word w of length 2n+1 such that the cocycle is
the same nonzero m on every configuration carrying w on [-n, n].  A periodic
certificate is a periodic point of period q <= 2n+1 with nonzero cocycle.
Profiles are measured per element; nothing here bounds a whole group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import TfgElement, _ranks, evaluate
from .errors import CertificateInvalid, NoMovingPeriodicPoint, OffLanguage, SearchBudgetExceeded
from .symbolic import EPC
from .tape import all_rows, cyclic_tape, window_tape


@dataclass(frozen=True)
class LookAheadCertificate:
    word: tuple
    n: int
    m: int

    @property
    def deficiency(self):
        return max(0, self.n - abs(self.m))

    def cylinder_point(self, left=(0,), right=(0,)) -> EPC:
        return EPC(left, self.word, right, -self.n)

    def to_json(self):
        return {"word": "".join(map(str, self.word)), "n": self.n, "m": self.m,
                "deficiency": self.deficiency}


@dataclass(frozen=True)
class PlookAheadCertificate:
    point: EPC
    q: int
    m: int

    @property
    def n(self):
        return max(1, math.ceil((self.q - 1) / 2))

    @property
    def deficiency(self):
        return max(0, self.n - abs(self.m))

    def to_json(self):
        return {"point": self.point.to_literal(), "period": self.q, "n": self.n, "m": self.m,
                "deficiency": self.deficiency}


def _program(g):
    return g.program if isinstance(g, TfgElement) else g


def lookahead_certificates(g, n: int, budget: int = 1 << 22) -> list:
    """Every constant nonzero cylinder of radius n, in lexicographic order of w."""
    prog = _program(g)
    dom = prog.domain
    R = max(n, prog.radius)
    length = 2 * R + 1
    if dom.count_words(length) > budget:
        raise SearchBudgetExceeded(f"{dom.count_words(length)} windows of length {length}")
    words = dom.words(length)
    if len(words) == 0:
        return []
    vals = prog.values(window_tape(words), all_rows(window_tape(words)),
                       np.full(len(words), R, dtype=np.int64))
    mid = words[:, R - n:R + n + 1]
    keys, inv = np.unique(_ranks(mid, dom.size), return_inverse=True)
    lo = np.full(len(keys), np.iinfo(np.int64).max)
    hi = np.full(len(keys), np.iinfo(np.int64).min)
    np.minimum.at(lo, inv, vals)
    np.maximum.at(hi, inv, vals)
    first = np.zeros(len(keys), dtype=np.int64)
    first[inv[::-1]] = np.arange(len(inv))[::-1]
    out = []
    for j in np.flatnonzero((lo == hi) & (lo != 0)):
        out.append(LookAheadCertificate(tuple(int(s) for s in mid[first[j]]), n, int(lo[j])))
    return out


@dataclass
class LookAheadProfile:
    label: str
    best: dict  # n -> LookAheadCertificate or None

    @property
    def rows(self):
        out = []
        for n, c in sorted(self.best.items()):
            m = abs(c.m) if c else 0
            out.append((n, m, max(0, n - m)))
        return out

    def to_json(self):
        return {"element": self.label,
                "profile": [list(r) for r in self.rows],
                "certificates": {str(n): (c.to_json() if c else None)
                                 for n, c in sorted(self.best.items())},
                "scope": "measured for the listed elements only"}

    def render(self):
        lines = [f"{'n':>3} {'|m|':>5} {'deficiency':>10}"]
        lines += [f"{n:>3} {m:>5} {d:>10}" for n, m, d in self.rows]
        return "\n".join(lines)


def measure_lookahead(g, N: int, budget: int = 1 << 22) -> LookAheadProfile:
    """Best certificate (largest |m|, then least w) for every n <= N.

    ``g`` may be a list of elements; the best over the list is kept, earlier
    elements winning ties.
    """
    family = list(g) if isinstance(g, (list, tuple)) else [g]
    best = {}
    for n in range(1, N + 1):
        top, pick = 0, None
        for e in family:
            for c in lookahead_certificates(e, n, budget):
                if abs(c.m) > top:
                    top, pick = abs(c.m), c
        best[n] = pick
    label = ",".join(getattr(e, "label", None) or "?" for e in family)
    return LookAheadProfile(label, best)


def powers_family(g: TfgElement, N: int) -> list:
    """g, g^2, .., g^N for measuring the cyclic subgroup's profile."""
    from .cocycle import compose
    out = [g]
    for _ in range(N - 1):
        out.append(compose(out[-1], g))
        out[-1].label = f"{g.label}^{len(out)}"
    return out


def measure_plookahead(g, N: int) -> PlookAheadCertificate:
    """Least-deficiency periodic certificate over periods <= 2N+1."""
    prog = _program(g)
    best = None
    for q in range(1, 2 * N + 2):
        words = prog.domain.periodic_words(q)
        if len(words) == 0:
            continue
        t = cyclic_tape(words)
        vals = prog.values(t, all_rows(t), np.zeros(len(words), dtype=np.int64))
        for i in np.flatnonzero(vals != 0):
            cert = PlookAheadCertificate(EPC.periodic(words[i].tolist()), q, int(vals[i]))
            if best is None or cert.deficiency < best.deficiency:
                best = cert
            break  # later words of the same period have the same n
    if best is None:
        raise NoMovingPeriodicPoint(f"cocycle vanishes on all periods up to {2 * N + 1}")
    return best


def lookaplooka_transform(g, cert: LookAheadCertificate) -> PlookAheadCertificate:
    """The w-periodic point lying in the certificate's cylinder."""
    q = len(cert.word)
    if q != 2 * cert.n + 1:
        raise CertificateInvalid("certificate word must have length 2n+1")
    x = EPC.periodic(cert.word, cert.n)
    try:
        m = evaluate(_program(g), x)
    except OffLanguage:
        raise CertificateInvalid("the periodic extension of w leaves the domain") from None
    if m != cert.m or m == 0:
        raise CertificateInvalid(f"cocycle is {m} on the periodic point, certificate says {cert.m}")
    return PlookAheadCertificate(x, x.period(), m)


def validate_plookahead(g, cert: PlookAheadCertificate) -> bool:
    return (cert.point.is_periodic() and cert.point.period() == cert.q
            and cert.q <= 2 * cert.n + 1 and cert.m != 0
            and evaluate(_program(g), cert.point) == cert.m)


def certificate_from_witness(witness, fill: int = 0) -> LookAheadCertificate:
    """Centered certificate from a belt witness, padding its left side."""
    n = len(witness.word) - witness.origin - 1
    pad = n - witness.origin
    if pad < 0:
        raise CertificateInvalid("witness extends further left than right")
    return LookAheadCertificate((fill,) * pad + tuple(witness.word), n, witness.displacement)
