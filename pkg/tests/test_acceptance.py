"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are the fixed bounds of the criteria (periods, sample counts,
runtime limits); nothing is tuned to make a check pass.
"""

import functools
import itertools
import time

import numpy as np

from conftest import record
from tfgkit.belts import BeltConstruction, GraphProductSpec
from tfgkit.cocycle import (EqualityPolicy, SymbolReader, compose, dial_table, differ_on_periodic,
                            equal, evaluate, identity, invert, permutes_periodic, pi01_table,
                            shift_element, table_from_function, verify_bijective)
from tfgkit.errors import ConstraintUnsatisfiable, NotFound, NotInjective, NotSurjective
from tfgkit.lamplighter import (FiniteAbelianGroup, WreathConstruction, identity_on_tokens,
                                lamplighter_report)
from tfgkit.lookahead import (certificate_from_witness, lookahead_certificates, lookaplooka_transform,
                              validate_plookahead)
from tfgkit.moves import (SearchPolicy, build_beta_cancel, cancellation_report,
                          move_aithful_check, stabilized, subset_sum, unique_moves_check)
from tfgkit.raag import BeltSampler, allocate_cells, build_witness, verify_graph_product
from tfgkit.roots import check_faithful, check_wreath_law, sqrt_shift
from tfgkit.sampling import identity_on_periodic
from tfgkit.simulation import simulate
from tfgkit.sofic import (SoficConstruction, golden_mean_elements, golden_mean_fixture,
                          parse_sofic_belts, token_periodic_configs)
from tfgkit.symbolic import full_shift

F2, F3, F4 = full_shift(2), full_shift(3), full_shift(4)
SLACK = 6  # cap on cells per block; keeps codewords short (see README)
LAMP = WreathConstruction(FiniteAbelianGroup((2,)))
REPORTS = {}


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                passed, detail = fn(*args, **kwargs)
            except Exception as exc:
                record(number, title, False, f"{type(exc).__name__}: {exc}")
                raise
            detail = f"{detail} ({time.perf_counter() - start:.1f}s)"
            record(number, title, passed, detail)
            assert passed, detail
        return run
    return wrap


def element(table, label):
    return verify_bijective(table, label=label)


def sigma(domain, k=1):
    return shift_element(domain, k)


def binary_corpus():
    s = sigma(F2)
    pi = element(pi01_table(), "pi01")
    return [s, invert(s), pi, element(dial_table(2), "dial2"), compose(pi, s)]


GRAPHS_UP_TO_3 = [([0], []), ([0, 1], []), ([0, 1], [(0, 1)]), ([0, 1, 2], []),
                  ([0, 1, 2], [(0, 1)]), ([0, 1, 2], [(0, 1), (1, 2)]),
                  ([0, 1, 2], [(0, 1), (1, 2), (0, 2)])]


# -- 1 -------------------------------------------------------------------------


def _not_bijective():
    return [table_from_function(F2, 0, lambda w: 1 if w[0] == 0 else 0, "move-on-0"),
            table_from_function(F2, 1, lambda w: 1 if w[1:] == (0, 1) else 0, "01-right"),
            table_from_function(F2, 1, lambda w: 1 if w == (1, 1, 1) else 0, "111-right")]


@criterion(1, "verifier agrees with periodic permutations, p <= 10")
def test_criterion_1_verifier_oracle():
    start = time.perf_counter()
    corpus = [(g.program, g.label) for g in (sigma(F2), invert(sigma(F2)))]
    corpus += [(pi01_table(), "pi01")] + [(dial_table(q), f"dial{q}") for q in (2, 3, 4)]
    corpus += [(LAMP.program("t"), "t"), (LAMP.program((1,)), "a")]
    for vertices, edges in GRAPHS_UP_TO_3:
        c = BeltConstruction(GraphProductSpec.make(vertices, edges, slack=SLACK))
        corpus += [(c.generator(u, verify=False).program, f"t{u}{vertices}{edges}")
                   for u in vertices]
    corpus += [(t, t.name) for t in _not_bijective()]
    disagreements, verified = [], 0
    for prog, label in corpus:
        try:
            verify_bijective(prog)
            verdict = True
        except (NotInjective, NotSurjective):
            verdict = False
        verified += verdict
        oracle = all(permutes_periodic(prog, p) for p in range(1, 11))
        if verdict != oracle:
            disagreements.append(label)
    elapsed = time.perf_counter() - start
    ok = not disagreements and elapsed < 300
    return ok, (f"{len(corpus)} rules ({verified} bijective, {len(corpus) - verified} not), "
                f"{len(disagreements)} disagreements {disagreements}")


# -- 2 -------------------------------------------------------------------------


def _policy_for(a, b):
    r = max(a.radius, b.radius)
    if a.domain.count_words(2 * r + 1) <= 1 << 22:
        return EqualityPolicy(exhaustive_radius=r, samples=0)
    return EqualityPolicy(exhaustive_radius=-1, period_bound=12, samples=0)


@criterion(2, "associativity and inverse laws")
def test_criterion_2_group_laws():
    groups = [binary_corpus(),
              [sigma(F3), element(dial_table(3), "dial3")],
              [LAMP.lamp((1,)), element(dial_table(4), "dial4"), sigma(F4)]]
    failures, tiers = [], {}
    for corpus in groups:
        triples = list(itertools.product(corpus, repeat=3))
        if corpus[0].domain.size == 4:
            triples = [(a, b, c) for a, b, c in triples if len({id(a), id(b), id(c)}) == 3]
        for a, b, c in triples:
            lhs, rhs = compose(compose(a, b), c), compose(a, compose(b, c))
            v = equal(lhs, rhs, _policy_for(lhs, rhs))
            tiers[v.tier] = tiers.get(v.tier, 0) + 1
            if not v.equal:
                failures.append(("assoc", a.label, b.label, c.label))
        for g in corpus + ([LAMP.t] if corpus[0].domain.size == 4 else []):
            ident = identity(g.domain)
            for prod in (compose(g, invert(g)), compose(invert(g), g)):
                v = equal(prod, ident, _policy_for(prod, ident))
                tiers[v.tier] = tiers.get(v.tier, 0) + 1
                if not v.equal:
                    failures.append(("inverse", g.label))
    return not failures, f"checks by tier {tiers}, failures {failures}"


# -- 3 -------------------------------------------------------------------------


RAAG_GRAPHS = {"K2": ([0, 1], [(0, 1)]), "non-edge": ([0, 1], []),
               "P3": ([0, 1, 2], [(0, 1), (1, 2)]),
               "C4": ([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0)])}


def raag_reports():
    if not REPORTS:
        policy = EqualityPolicy(period_bound=12, samples=100_000)
        for name, (v, e) in RAAG_GRAPHS.items():
            spec = GraphProductSpec.make(v, e, slack=SLACK)
            REPORTS[name] = verify_graph_product(spec, policy,
                                                 word_length=4 if name == "non-edge" else 0)
    return REPORTS


@criterion(3, "graph product relations and witnesses")
def test_criterion_3_raag():
    start = time.perf_counter()
    reps = raag_reports()
    edges = [e for r in reps.values() for e in r["edges"]]
    non_edges = [e for r in reps.values() for e in r["non_edges"]]
    words = reps["non-edge"]["words"]
    tiers = sorted({t for e in edges for t in e.get("tiers", [])})
    ok = (all(e["identity"] for e in edges)
          and all(e["nontrivial"] and e["heads_match"] for e in non_edges)
          and len(words) == 160 and all(w["nontrivial"] and w["heads_match"] for w in words)
          and time.perf_counter() - start < 900)
    return ok, (f"edge commutators identity {sum(e['identity'] for e in edges)}/{len(edges)} "
                f"on {tiers}; non-edge witnesses {sum(e['nontrivial'] for e in non_edges)}/"
                f"{len(non_edges)}; free words {sum(w['nontrivial'] for w in words)}/{len(words)} "
                f"with exact head offsets")


# -- 4 -------------------------------------------------------------------------


def _main_fits(d, p, c_u, cap=100):
    if d == 2:
        return 1 <= 2 * p - d - 1 <= cap * c_u
    lo, hi = (2 * p - d - 1) // (d - 1), -(-(2 * p - d - 1) // (d - 1))
    return lo >= 1 and hi <= cap * c_u


@criterion(4, "cell allocation arithmetic")
def test_criterion_4_allocation():
    rng = np.random.default_rng(4)
    violations, counts, unsat = [], {"main": 0, "fallback": 0}, 0
    while sum(counts.values()) < 1000:
        d = 2 * int(rng.integers(1, 31))
        p = int(rng.integers(d + 2, d + 2 + int(rng.choice([20, 200, 2000]))))
        c_u = int(rng.integers(1, 4))
        try:
            blocks, variant = allocate_cells(d, p, c_u, with_variant=True)
        except ConstraintUnsatisfiable:
            unsat += 1
            if _main_fits(d, p, c_u) or p - d - 1 <= 100 * c_u:
                violations.append((d, p, c_u, "unsatisfiable but a recipe fits"))
            continue
        counts[variant] += 1
        cycle = 2 * p if variant == "main" else p
        if sum(a for a, _ in blocks) != d or sum(b for _, b in blocks) != cycle - d:
            violations.append((d, p, c_u, "totals"))
        if not all(1 <= x <= 100 * c_u for pair in blocks for x in pair):
            violations.append((d, p, c_u, "range"))
        if (variant == "fallback") == _main_fits(d, p, c_u):
            violations.append((d, p, c_u, "fallback selection"))
    return not violations, (f"{counts['main']} main (sum b = 2p-d), {counts['fallback']} "
                            f"two-block fallback (sum b = p-d), {unsat} draws need larger p, "
                            f"{len(violations)} violations {violations[:3]}")


# -- 5 -------------------------------------------------------------------------


@criterion(5, "lamplighter relations")
def test_criterion_5_lamplighter():
    start = time.perf_counter()
    r = lamplighter_report(FiniteAbelianGroup((2,)), period_bound=14, direct_bound=10,
                           samples=100_000, max_shift=4)
    order = r["orders"][0]
    comms = r["commutators"]
    ok = (r["ok"] and order["tier"] == "E" and order["identity"]
          and len(comms) == 4 and all(c["identity"] for c in comms)
          and all(w["nontrivial"] for w in r["lamp_words"]) and r["t_order"]["exceeds"]
          and time.perf_counter() - start < 600)
    return ok, (f"a^2 = id at tier {order['tier']}; commutators i=1..4 identity "
                f"{sum(c['identity'] for c in comms)}/{len(comms)} (direct p<=10, tokens p<=14, "
                f"1e5 samples); lamp words nontrivial {sum(w['nontrivial'] for w in r['lamp_words'])}"
                f"/{len(r['lamp_words'])}; t orbit {r['t_order']['orbit_length']} > 64")


# -- 6 -------------------------------------------------------------------------


def _simulation_corpus():
    b = binary_corpus()
    belt = BeltConstruction(GraphProductSpec.make([0, 1], [], slack=SLACK))
    read2 = SymbolReader(F2)
    f2 = [(g, read2) for g in (b[0], b[1], b[2], b[4])]
    f2.append((belt.step_element(0), belt.reader(0)))
    g3 = [sigma(F3), element(dial_table(3), "dial3")]
    g4 = [sigma(F4), element(dial_table(4), "dial4"), LAMP.lamp((1,))]
    return [(b, f2, "P"), (g3, [(g, SymbolReader(F3)) for g in g3], "P"),
            (g4, [(LAMP.t, SymbolReader(F4))], "tokens")]


@criterion(6, "simulation is a homomorphism on periods <= 12")
def test_criterion_6_simulation():
    rng = np.random.default_rng(6)
    corpus = _simulation_corpus()
    failures, used = [], {"P": 0, "tokens": 0}
    for _ in range(200):
        gs, fs, mode = corpus[int(rng.choice(3, p=[0.6, 0.2, 0.2]))]
        g, h = (compose(gs[int(rng.integers(len(gs)))], gs[int(rng.integers(len(gs)))])
                if rng.random() < 0.3 else gs[int(rng.integers(len(gs)))] for _ in range(2))
        f, s = fs[int(rng.integers(len(fs)))]
        lhs = simulate(compose(g, h), f, s)
        rhs = compose(simulate(g, f, s), simulate(h, f, s))
        if mode == "P":
            bad = differ_on_periodic(lhs.program, rhs.program, 12)
        else:
            bad = identity_on_tokens([compose(invert(lhs), rhs)], LAMP, 12)
        used[mode] += 1
        if bad:
            failures.append((g.label, h.label, f.label))
    return not failures, (f"200 pairs: {used['P']} over all periods <= 12, {used['tokens']} "
                          f"along lamp blocks over token periods <= 12; failures {failures}")


# -- 7 -------------------------------------------------------------------------


@criterion(7, "look-ahead transform and deficiency bounds")
def test_criterion_7_lookahead():
    corpus = binary_corpus() + [element(dial_table(3), "dial3"), LAMP.lamp((1,)),
                                element(dial_table(4), "dial4")]
    certs = []
    for n in (1, 2, 3):
        for g in corpus:
            certs += [(g, c) for c in lookahead_certificates(g, n)]
    rng = np.random.default_rng(7)
    picked = [certs[i] for i in sorted(rng.choice(len(certs), 100, replace=False))]
    bad = []
    for g, c in picked:
        out = lookaplooka_transform(g, c)
        if out.m != c.m or not validate_plookahead(g, out):
            bad.append(c)
    belt_bad = 0
    c = BeltConstruction(GraphProductSpec.make([0, 1], [], slack=SLACK))
    for u in (0, 1):
        wit = build_witness(c, [(u, 1)])
        out = lookaplooka_transform(c.generator(u), certificate_from_witness(wit))
        belt_bad += out.m != wit.displacement
    reps = raag_reports()
    las = [r["lookahead"] for r in reps.values()]
    consts = sorted({la["deficiency_constant"] for la in las})
    worst = max(la["max_deficiency"] for la in las)
    bounded = all(la["max_deficiency"] <= la["deficiency_constant"] for la in las)
    frac = all(la["fraction_ok"] and la["bounds_ok"] for la in las)
    rows = [w for la in las for w in la["witness_bounds"]
            if w["size"] >= la["fraction_threshold"]]
    low = min(w["fraction"] for w in rows)
    ok = not bad and not belt_bad and bounded and frac and len(picked) == 100
    return ok, (f"100 of {len(certs)} certificates transform with equal m ({len(bad)} bad), "
                f"belt witnesses re-validate; max deficiency {worst} <= C = {consts}; "
                f"{len(rows)} witnesses above threshold, least fraction {low:.3f} >= 1/3")


# -- 8 -------------------------------------------------------------------------


@criterion(8, "golden mean embedding")
def test_criterion_8_sofic():
    scheme = golden_mean_fixture()
    subs = [0, 1, 1, 0, 1, 0, 0, 1]
    row = [0, 0, 0] + sum((list(scheme.codebook[a]) for a in subs), []) + [0, 0, 0]
    parse = parse_sofic_belts(scheme, row)
    params = (scheme.p, scheme.r, scheme.block_length) == (2, 1, 4)
    elimination = (parse.removed == [1, 2] and parse.erased == [0]
                   and parse.belts == [[3, 4, 5, 6, 7]])
    cycle = [c[0] for c in parse.cycles[0]] == [15, 19, 23, 27, 31, 34, 33, 32, 29, 28, 25,
                                                24, 21, 20, 17, 16]
    con = SoficConstruction(scheme)
    gens = golden_mean_elements()
    rng = np.random.default_rng(8)

    def sample():
        out = None
        for _ in range(int(rng.integers(1, 4))):
            g = gens[int(rng.integers(3))]
            g = invert(g) if rng.random() < 0.5 else g
            out = g if out is None else compose(out, g)
        return out

    elems = [sample() for _ in range(20)]
    configs = token_periodic_configs(scheme, 12)
    failures = 0
    for g, h in zip(elems, elems[1:] + elems[:1]):
        d = compose(invert(con.embed(compose(g, h))), compose(con.embed(g), con.embed(h)))
        failures += identity_on_periodic([d], configs) is not None
    direct = differ_on_periodic(con.embed(compose(elems[0], elems[1])).program,
                                compose(con.embed(elems[0]), con.embed(elems[1])).program, 8)
    ok = params and elimination and cycle and not failures and direct is None
    return ok, (f"p, r, block length = {scheme.p}, {scheme.r}, {scheme.block_length}; "
                f"removed preblocks {parse.removed}, erased {parse.erased}, surviving belt "
                f"{parse.belts}; reference cycle {'matches' if cycle else 'differs'}; 20 sampled "
                f"elements homomorphic on {len(configs)} token periodic points <= 12 "
                f"({failures} failures), direct periods <= 8 agree")


# -- 9 -------------------------------------------------------------------------


@criterion(9, "subset-sum cancellation and unique moves")
def test_criterion_9_cancellation():
    spec = GraphProductSpec.make([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0)], slack=SLACK)
    c = BeltConstruction(spec)
    sampler = BeltSampler(c)
    Z2 = FiniteAbelianGroup((2,))
    rng = np.random.default_rng(9)
    pairs = [(0, 1), (1, 2)]
    checked, nonzero, oracle_bad, aithful = 0, 0, 0, []
    for u, v in pairs:
        g = [c.generator(u), c.generator(v)]
        beta = build_beta_cancel(g, (1,), Z2, EqualityPolicy(samples=4000, sampler=sampler))
        configs = sampler.epcs(rng, 60)
        configs += [build_witness(c, [(w, 1)]).cylinder() for w in (u, v)]
        configs += [build_witness(c, [(u, 1), ((u + 2) % 4, 1)]).cylinder()]
        stab = [x for x in configs if stabilized(g, x)]
        rep = cancellation_report(beta, g, stab, rng)
        checked += rep["checked"]
        nonzero += len(rep["nonzero"])
        endos = Z2.endomorphisms()
        for x in stab:
            vals = {evaluate(e, x) for e, _ in beta.support} | {0}
            gamma = {w: endos[int(rng.integers(len(endos)))] for w in vals}
            oracle_bad += any(subset_sum(beta, g, x, gamma))
        try:
            move_aithful_check(beta.support, Z2, SearchPolicy(period_bound=0, extra=stab))
            aithful.append("found")
        except NotFound:
            aithful.append("NotFound")
    s = [sigma(F2, k) if k else identity(F2) for k in range(-2, 3)]
    fams = {"sigma^-2..2": s, "sigma,sigma^2": [s[3], s[4]], "id,sigma": [s[2], s[3]],
            "id,pi01": [identity(F2), element(pi01_table(), "pi01")]}
    found = {}
    for name, fam in fams.items():
        cert = unique_moves_check(fam)
        found[name] = (cert.element, cert.config.period())
    immediate = all(p <= 2 for _, p in found.values())
    ok = (checked > 0 and nonzero == 0 and oracle_bad == 0
          and aithful == ["NotFound"] * len(pairs) and immediate)
    return ok, (f"C4 pairs {pairs}: {checked} (x, gamma) sums on stabilized points all zero "
                f"(subset oracle agrees), move-aithful {aithful}; unique-move certificates "
                f"{found}")


# -- 10 ------------------------------------------------------------------------


@criterion(10, "root subshift wreath embedding")
def test_criterion_10_roots():
    parts, ok = [], True
    for k in (2, 3):
        root = sqrt_shift(F2, k)
        law = check_wreath_law(root, length=3, period_bound=12)
        faith = check_faithful(root, length=3, period_bound=8)
        ok &= not law["failures"] and not faith["clashes"]
        parts.append(f"k={k}: {law['words']} words law failures {len(law['failures'])}, "
                     f"{faith['elements']} distinct elements, clashes {len(faith['clashes'])}")
    return ok, "; ".join(parts)
