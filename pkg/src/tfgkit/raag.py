"""Witnesses and relation checks for graph products built from belts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .belts import BeltConstruction, GraphProductSpec
from .cocycle import (EqualityPolicy, commutator, compose, differ_on_periodic, evaluate,
                      identity, power)
from .errors import ConstraintUnsatisfiable, NotReduced, UsageError
from .sampling import TokenSampler, identity_on_bulk, identity_on_periodic
from .symbolic import EPC

FILLER = (0, 1)


# --------------------------------------------------------------------------
# cell allocation


def _split(total, parts):
    """``total`` split over ``parts`` as evenly as possible, larger values first."""
    if parts == 0:
        return []
    q, r = divmod(total, parts)
    return [q + 1] * r + [q] * (parts - r)


def allocate_cells(d: int, p: int, c_u: int = 1, slack: int = 100, with_variant=False,
                   variant: str = "auto"):
    """Blocks (a_i, b_i) for a belt on which d forward steps from the leftmost
    top cell land in the rightmost bottom cell.

    Main recipe: d blocks, cycle length 2p.  Fallback: two blocks, cycle length p.
    ``variant`` forces one of them ("main" or "fallback"); "auto" tries main first.
    """
    if variant not in ("auto", "main", "fallback"):
        raise UsageError(f"unknown allocation variant {variant!r}")
    if d <= 0:
        raise UsageError("the simulated element must move forward (d >= 1)")
    cap = slack * c_u
    a = d
    tops = [1] + _split(d - 1, a - 1)
    bottoms = _split(2 * p - d - 1, a - 1) + [1]
    main = list(zip(tops, bottoms))
    if variant != "fallback" and len(tops) == len(bottoms) == a \
            and sum(bottoms) == 2 * p - d and all(1 <= v <= cap for v in tops + bottoms):
        return (main, "main") if with_variant else main
    fb = [(1, p - d - 1), (d - 1, 1)]
    if variant != "main" and all(1 <= x <= cap for pair in fb for x in pair):
        return (fb, "fallback") if with_variant else fb
    raise ConstraintUnsatisfiable(f"no allocation for d={d}, p={p}, cap={cap}")


# --------------------------------------------------------------------------
# words in the graph product


def normalize_word(spec: GraphProductSpec, word):
    out = []
    for u, e in word:
        if u not in spec.vertices:
            raise UsageError(f"unknown vertex {u}")
        q = spec.node_groups[u]
        e = e % q if q else e
        out.append((u, e))
    return out


def check_reduced(spec: GraphProductSpec, word):
    """Raise NotReduced when a syllable is trivial or two syllables of one
    vertex can be brought together through commuting syllables."""
    word = normalize_word(spec, word)
    for i, (u, e) in enumerate(word):
        if e == 0:
            raise NotReduced(f"syllable {i} is trivial")
    for i, j in itertools.combinations(range(len(word)), 2):
        u = word[i][0]
        if word[j][0] != u:
            continue
        between = word[i + 1:j]
        if all(spec.adjacent(u, w) for w, _ in between):
            raise NotReduced(f"syllables {i} and {j} of vertex {u} can be joined")
    return word


def free_reduced_words(vertices, max_len):
    """Freely reduced words over the letters t_u^{+-1}, as syllable lists."""
    letters = [(u, s) for u in vertices for s in (1, -1)]
    out = []
    for n in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=n):
            if any(a[0] == b[0] and a[1] == -b[1] for a, b in zip(w, w[1:])):
                continue
            syl = []
            for u, s in w:
                if syl and syl[-1][0] == u:
                    syl[-1] = (u, syl[-1][1] + s)
                else:
                    syl.append((u, s))
            out.append(syl)
    return out


def word_element(construction: BeltConstruction, word):
    """Image of the word (written left to right, rightmost acting first)."""
    elem = identity(construction.domain)
    for u, e in word:
        elem = compose(elem, power(construction.generator(u), e))
    return elem


# --------------------------------------------------------------------------
# node certificates and witnesses


@dataclass
class NodeCertificate:
    point: tuple  # one period of the simulated periodic point, origin first
    value: int
    n: int
    p: int


def node_certificate(spec: GraphProductSpec, u, e) -> NodeCertificate:
    """Periodic point on which the doubled node element t_u^e moves by 2e,
    with n, p arranged so that |c| < n <= p - 1 <= 2n + 1."""
    q = spec.node_groups[u]
    if q == 0:
        point, value = (0,), 2 * e
    else:
        point = tuple(s for i in range(q) for s in (i, 0))
        value = 2 * e
    period = len(point)
    n = max(2, abs(value) + 1)
    while True:
        if period <= 2 * n + 1:
            p = period
            while p - 1 < n:
                p *= 2
            if p - 1 <= 2 * n + 1:
                return NodeCertificate(point, value, n, p)
        n += 1


@dataclass
class WitnessWord:
    word: tuple
    filler: tuple
    origin: int  # index in word of coordinate 0
    belts: list  # (vertex, exponent, start, end, keys)
    heads: list  # predicted head offset after each syllable, application order
    syllables: list  # application order
    last_block: int  # length of the rightmost block of the last belt

    @property
    def displacement(self):
        return self.heads[-1] if self.heads else 0

    def cylinder(self, left=(0,), right=(0,)) -> EPC:
        return EPC(left, self.word, right, -self.origin)

    def to_json(self):
        return {"word": "".join(map(str, self.word)), "origin": self.origin,
                "heads": self.heads, "syllables": [list(s) for s in self.syllables],
                "belts": [{"vertex": u, "exponent": e, "start": s, "end": t}
                          for u, e, s, t, _ in self.belts]}


def _belt_keys(spec, u, e):
    cert = node_certificate(spec, u, e)
    d = abs(cert.value)
    alloc, variant = allocate_cells(d, cert.p, spec.constants[u], spec.slack, with_variant=True)
    cycle = 2 * cert.p if variant == "main" else cert.p
    if cert.value < 0:
        alloc = [(b, a) for a, b in alloc]
    seq = [cert.point[i % len(cert.point)] for i in range(cycle)]
    if cert.value < 0:
        # walking backwards from the origin reads the point in reverse
        seq = [seq[0]] + seq[1:][::-1]
    tops_total = sum(a for a, _ in alloc)
    top_syms, bottom_syms = seq[:tops_total], seq[tops_total:][::-1]
    keys = []
    ti = bi = 0
    for a, b in alloc:
        v = tuple(top_syms[ti:ti + a]) + tuple(bottom_syms[bi:bi + b])
        ti += a
        bi += b
        keys.append((u, a, b, v))
    return keys


def build_witness(construction: BeltConstruction, word) -> WitnessWord:
    """Cylinder word on which the image of ``word`` moves the head predictably."""
    spec = construction.spec
    word = check_reduced(spec, word)
    if not word:
        raise NotReduced("empty word")
    app = list(reversed(word))
    chosen = [0]
    while True:
        cur = app[chosen[-1]][0]
        nxt = next((j for j in range(chosen[-1] + 1, len(app))
                    if app[j][0] != cur and not spec.adjacent(app[j][0], cur)), None)
        if nxt is None:
            break
        chosen.append(nxt)
    body = []
    belts = []
    pos = 0
    for j in chosen:
        u, e = app[j]
        keys = _belt_keys(spec, u, e)
        words = [construction.encode(k) for k in keys]
        start = pos
        for w in words:
            body.extend(w)
            pos += len(w)
        belts.append((u, e, start, pos, keys))
    # landing cell of each chosen syllable
    landings = []
    for i, (u, e, start, end, keys) in enumerate(belts):
        last = keys[-1]
        last_start = end - len(construction.encode(last))
        rightmost_bottom = last_start + last[1] + last[2] - 1
        if i + 1 < len(belts) and u > belts[i + 1][0]:
            landings.append(end)
        else:
            landings.append(rightmost_bottom)
    heads = []
    cur = 0
    k = 0
    for j in range(len(app)):
        if k < len(chosen) and chosen[k] == j:
            cur = landings[k]
            k += 1
        heads.append(cur)
    f = len(FILLER)
    full = FILLER + tuple(body) + FILLER
    last_block = len(construction.encode(belts[-1][4][-1]))
    return WitnessWord(full, FILLER, f, belts, heads, app, last_block)


def witness_heads(construction, witness: WitnessWord, x: EPC) -> list:
    """Head offsets after each syllable when the word's image acts on x."""
    o = 0
    out = []
    for u, e in witness.syllables:
        g = power(construction.generator(u), e)
        o += evaluate(g, x.shift(o))
        out.append(o)
    return out


def check_witness(construction, witness: WitnessWord, rng, extensions=3):
    """Predicted head offsets hold on several configurations of the cylinder."""
    tails = [((0,), (0,)), ((1,), (1,)), ((0, 1, 1), (1, 0))]
    for _ in range(max(0, extensions - len(tails))):
        tails.append((tuple(rng.integers(0, 2, 3)), tuple(rng.integers(0, 2, 2))))
    results = []
    for left, right in tails[:extensions]:
        got = witness_heads(construction, witness, witness.cylinder(left, right))
        results.append(got == witness.heads)
        if got != witness.heads:
            return False, {"tails": [left, right], "expected": witness.heads, "got": got}
    return True, None


# --------------------------------------------------------------------------
# samplers for belt configurations


class BeltSampler(TokenSampler):
    """Belt-structured rows: mostly codewords with small cell counts."""

    def __init__(self, construction: BeltConstruction, max_cells=4):
        super().__init__(junk=2)
        self.c = construction
        self.max_cells = max_cells
        self.spec = construction.spec

    def random_key(self, rng):
        u = self.spec.vertices[int(rng.integers(0, len(self.spec.vertices)))]
        cap = min(self.spec.max_cells(u), self.max_cells)
        a, b = int(rng.integers(1, cap + 1)), int(rng.integers(1, cap + 1))
        v = tuple(int(s) for s in rng.integers(0, self.spec.theta(u), a + b))
        return (u, a, b, v)

    def random_token(self, rng):
        return self.c.encode(self.random_key(rng))


# --------------------------------------------------------------------------
# the report


def lookahead_of_witness(witness: WitnessWord):
    n = len(witness.word) - witness.origin - 1
    m = witness.displacement
    return {"n": n, "m": m, "deficiency": max(0, n - abs(m))}


def verify_graph_product(spec: GraphProductSpec, policy: EqualityPolicy | None = None,
                         word_length: int = 0, construction=None, seed: int = 0,
                         periodic_samples: int = 400) -> dict:
    """Edge commutation, non-edge witnesses, node relations and look-ahead data."""
    policy = policy or EqualityPolicy()
    c = construction or BeltConstruction(spec)
    rng = np.random.default_rng(seed)
    sampler = BeltSampler(c)
    lmax = c.lexicon.max_length
    gens = {u: c.generator(u) for u in spec.vertices}
    report = {"spec": spec.to_json(), "policy": policy.to_json(), "ok": True,
              "edges": [], "non_edges": [], "relations": [], "words": [], "lookahead": {}}
    structured = sampler.periodic_rows(rng, periodic_samples)

    def relation_check(elements):
        w = None
        tiers = []
        for e in elements:
            w = differ_on_periodic(e.program, identity(c.domain).program, policy.period_bound)
            if w:
                return {"tier": "P", "witness": {"element": e.label,
                                                 "config": w["config"].to_literal()}}
        tiers.append(f"P<={policy.period_bound}")
        w = identity_on_periodic(elements, structured)
        if w:
            return {"tier": "P-belts", "witness": w}
        tiers.append(f"belt-periodic x{len(structured)}")
        if policy.samples:
            w = identity_on_bulk(elements, sampler, rng, policy.samples)
            if w:
                return {"tier": "R", "witness": w}
            tiers.append(f"R x{policy.samples}")
        return {"tiers": tiers}

    edge_list = sorted(tuple(sorted(e)) for e in spec.edges)
    if edge_list:
        comms = [commutator(gens[u], gens[v]) for u, v in edge_list]
        res = relation_check(comms)
        for (u, v), comm in zip(edge_list, comms):
            entry = {"edge": [u, v], "identity": "witness" not in res, **res}
            report["edges"].append(entry)
        if "witness" in res:
            report["ok"] = False
    node_rel = [(u, power(gens[u], q)) for u, q in spec.node_groups.items() if q]
    if node_rel:
        res = relation_check([e for _, e in node_rel])
        for u, _ in node_rel:
            report["relations"].append({"vertex": u, "order": spec.node_groups[u],
                                        "identity": "witness" not in res, **res})
        if "witness" in res:
            report["ok"] = False
    witnesses = []
    for u, v in itertools.combinations(spec.vertices, 2):
        if spec.adjacent(u, v):
            continue
        word = [(u, -1), (v, -1), (u, 1), (v, 1)]
        wit = build_witness(c, word)
        ok, detail = check_witness(c, wit, rng)
        entry = {"pair": [u, v], "heads_match": ok, "displacement": wit.displacement,
                 "nontrivial": ok and wit.displacement != 0, "witness": wit.to_json()}
        if detail:
            entry["failure"] = detail
        report["non_edges"].append(entry)
        witnesses.append(wit)
        if not entry["nontrivial"]:
            report["ok"] = False
    if word_length:
        for word in free_reduced_words(spec.vertices, word_length):
            try:
                check_reduced(spec, word)
            except NotReduced:
                continue
            wit = build_witness(c, word)
            ok, detail = check_witness(c, wit, rng, extensions=2)
            entry = {"word": [list(s) for s in word], "heads_match": ok,
                     "displacement": wit.displacement,
                     "nontrivial": ok and wit.displacement != 0}
            report["words"].append(entry)
            witnesses.append(wit)
            if not entry["nontrivial"]:
                report["ok"] = False
    # look-ahead data
    for u in spec.vertices:
        wit = build_witness(c, [(u, 1)])
        ok, _ = check_witness(c, wit, rng, extensions=2)
        witnesses.append(wit)
        report["lookahead"][str(u)] = {**lookahead_of_witness(wit), "heads_match": ok}
    bound_c = len(FILLER) + lmax
    threshold = -(-3 * (lmax + 2 * len(FILLER)) // 2)
    rows = []
    for wit in witnesses:
        la = lookahead_of_witness(wit)
        size = len(wit.word)
        lower = size - wit.last_block - 2 * len(FILLER)
        rows.append({"size": size, "displacement": la["m"], "lower_bound": lower,
                     "bound_holds": abs(la["m"]) >= lower,
                     "fraction": lower / size, "deficiency": la["deficiency"]})
    report["lookahead"]["deficiency_constant"] = bound_c
    report["lookahead"]["max_deficiency"] = max((r["deficiency"] for r in rows), default=0)
    report["lookahead"]["fraction_threshold"] = threshold
    report["lookahead"]["witness_bounds"] = rows
    big = [r for r in rows if r["size"] >= threshold]
    report["lookahead"]["fraction_ok"] = all(r["fraction"] >= 1 / 3 for r in big)
    report["lookahead"]["bounds_ok"] = all(r["bound_holds"] for r in rows)
    if not (report["lookahead"]["fraction_ok"] and report["lookahead"]["bounds_ok"]
            and report["lookahead"]["max_deficiency"] <= bound_c):
        report["ok"] = False
    return report
