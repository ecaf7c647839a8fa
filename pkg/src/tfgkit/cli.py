"""Command-line front end.  Every command prints one JSON report to stdout
(or --out) and exits 0 on success, 1 on a mathematical counterexample and 2
on bad input."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import errors as E
from .cocycle import (EqualityPolicy, VerifyPolicy, canonicalize, compose, dial_table, identity,
                      invert, pi01_table, power, shift_element, table_from_json, table_to_json,
                      verify_bijective)
from .symbolic import domain_from_json, full_shift, parse_configuration

SCHEMA_VERSION = 1

# errors that mean the mathematics said no, as opposed to bad input
COUNTEREXAMPLES = (E.NotInjective, E.NotSurjective, E.NonCommuting, E.NotFound,
                   E.CertificateInvalid, E.NoMovingPeriodicPoint, E.NotReduced,
                   E.ConstraintUnsatisfiable, E.InternalInconsistency)


class Counterexample(Exception):
    def __init__(self, report):
        super().__init__("counterexample")
        self.report = report


@dataclass
class RunConfig:
    exhaustive_radius: int | None = None
    period_bound: int = 12
    samples: int = 100_000
    budget: int = 1 << 26
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("period_bound", "budget", "workers"):
            if getattr(self, name) < 1:
                raise E.UsageError(f"{name} must be positive")
        if self.samples < 0 or (self.exhaustive_radius is not None and self.exhaustive_radius < 0):
            raise E.UsageError("bounds must be nonnegative")

    def equality(self, sampler=None) -> EqualityPolicy:
        return EqualityPolicy(self.exhaustive_radius, self.period_bound, self.samples, self.seed,
                              sampler)

    def to_json(self):
        return asdict(self)


# -- inputs ---------------------------------------------------------------------


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise E.UsageError(f"{path}: malformed JSON: {exc}") from None
    except OSError as exc:
        raise E.UsageError(f"{path}: {exc.strerror}") from None


def load_domain(obj):
    if obj is None:
        return full_shift(2)
    try:
        return domain_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise E.UsageError(f"bad domain description: {exc}") from None


def load_program(obj):
    """Rule description -> unverified program.

    Accepted forms: a table {radius, domain, entries}; {"builtin": name, ...}
    with name one of identity, shift (k), pi01, dial (q); {"compose": [a, b]};
    {"inverse": a}; {"power": a, "k": n}.
    """
    if not isinstance(obj, dict):
        raise E.UsageError("rule must be a JSON object")
    try:
        if "entries" in obj:
            return table_from_json(obj)
        if "builtin" in obj:
            name = obj["builtin"]
            dom = load_domain(obj.get("domain"))
            if name == "identity":
                return identity(dom).program
            if name == "shift":
                return shift_element(dom, int(obj.get("k", 1))).program
            if name == "pi01":
                return pi01_table(dom)
            if name == "dial":
                return dial_table(int(obj["q"]))
            raise E.UsageError(f"unknown builtin {name!r}")
        if "compose" in obj:
            parts = [load_element(p) for p in obj["compose"]]
            out = parts[0]
            for p in parts[1:]:
                out = compose(out, p)
            return out.program
        if "inverse" in obj:
            return invert(load_element(obj["inverse"])).program
        if "power" in obj:
            return power(load_element(obj["power"]), int(obj["k"])).program
    except (KeyError, TypeError, ValueError) as exc:
        raise E.UsageError(f"bad rule description: {exc!r}") from None
    raise E.UsageError("rule needs one of entries, builtin, compose, inverse, power")


def load_element(obj, label=None):
    prog = load_program(obj)
    return verify_bijective(prog, label=label or obj.get("label") or _label(obj))


def _label(obj):
    if "builtin" in obj:
        return obj["builtin"] + "".join(str(obj[k]) for k in ("k", "q") if k in obj)
    return obj.get("name")


def element_from_file(path):
    return load_element(read_json(path))


# -- commands -------------------------------------------------------------------


def cmd_verify_element(args, cfg):
    obj = read_json(args.rule)
    prog = load_program(obj)
    result = {"rule": obj.get("label") or _label(obj) or args.rule, "radius": prog.radius,
              "max_disp": prog.max_disp, "bounds": {"budget": cfg.budget}}
    try:
        detail = verify_bijective(prog, VerifyPolicy(budget=cfg.budget)).proof.to_json()
    except E.NotInjective as exc:
        result.update(injective=False, surjective=None, witness=_plain(exc.witness),
                      error=str(exc))
        raise Counterexample(result)
    except E.NotSurjective as exc:
        result.update(injective=True, surjective=False, witness=_plain(exc.witness),
                      error=str(exc))
        raise Counterexample(result)
    result.update(injective=True, surjective=True, proof=detail)
    return result


def cmd_compose(args, cfg):
    elems = [element_from_file(p) for p in args.rules]
    out = elems[0]
    for e in elems[1:]:
        out = compose(out, e)
    result = {"element": out.label, "radius": out.radius, "max_disp": out.max_disp}
    try:
        result["table"] = table_to_json(canonicalize(out))
    except E.SearchBudgetExceeded as exc:
        result["table"] = None
        result["note"] = str(exc)
    return result


def cmd_raag(args, cfg):
    from .belts import GraphProductSpec
    from .raag import verify_graph_product
    try:
        spec = GraphProductSpec.from_json(read_json(args.graph))
    except (KeyError, TypeError, ValueError) as exc:
        raise E.UsageError(f"bad graph description: {exc!r}") from None
    report = verify_graph_product(spec, cfg.equality(), word_length=args.word_length,
                                  seed=cfg.seed)
    if not report["ok"]:
        raise Counterexample(report)
    return report


def _lamp(args, cfg, orders):
    from .lamplighter import FiniteAbelianGroup, lamplighter_report
    group = FiniteAbelianGroup.parse(orders)
    report = lamplighter_report(group, period_bound=max(cfg.period_bound, args.token_bound),
                                direct_bound=min(cfg.period_bound, 10), samples=cfg.samples,
                                max_shift=args.max_shift, seed=cfg.seed)
    if not report["ok"]:
        raise Counterexample(report)
    return report


def cmd_lamplighter(args, cfg):
    return _lamp(args, cfg, args.group or "2")


def cmd_wreath(args, cfg):
    return _lamp(args, cfg, args.group)


def _scheme(args):
    from .sofic import golden_mean_fixture, make_scheme
    from .symbolic import Alphabet, Codebook, VertexShift
    if args.fixture == "golden-mean":
        return golden_mean_fixture()
    if not args.sft:
        raise E.UsageError("embed-sft needs --sft or --fixture")
    shift = load_domain(read_json(args.sft))
    if not isinstance(shift, VertexShift):
        raise E.UsageError("--sft must describe a vertex shift")
    book = None
    if args.codebook:
        raw = read_json(args.codebook)
        try:
            book = Codebook({int(k): Alphabet(args.target_alphabet).parse(v) for k, v in raw.items()},
                            Alphabet(args.target_alphabet))
        except (ValueError, AttributeError) as exc:
            raise E.UsageError(f"bad codebook: {exc}") from None
    return make_scheme(shift, args.target_alphabet, book)


def cmd_embed_sft(args, cfg):
    from .cocycle import permutes_periodic
    from .sofic import SoficConstruction, parse_sofic_belts
    scheme = _scheme(args)
    result = {"scheme": scheme.to_json()}
    row = args.row
    if row is None and args.fixture == "golden-mean":
        subs = [0, 1, 1, 0, 1, 0, 0, 1]
        row = "000" + "".join("".join(map(str, scheme.codebook[a])) for a in subs) + "000"
    if row is not None:
        word = [int(ch) for ch in row]
        parse = parse_sofic_belts(scheme, word)
        result["parse"] = {
            "row": row,
            "preblocks": [{"start": s, "symbol": a} for s, _, a in parse.preblocks],
            "removed": parse.removed, "erased": parse.erased, "belts": parse.belts,
            "cycles": [[{"cell": p, "reads": a, "role": r} for p, a, r in cyc]
                       for cyc in parse.cycles]}
    if args.element:
        g = element_from_file(args.element)
        con = SoficConstruction(scheme)
        e = con.embed(g)
        bound = min(cfg.period_bound, 6)
        result["embedded"] = {"element": e.label, "radius": e.radius, "max_disp": e.max_disp,
                              "step_proof": con.step_element().proof.to_json(),
                              "permutes_periodic_up_to": bound,
                              "permutes": all(permutes_periodic(e.program, p)
                                              for p in range(1, bound + 1))}
    return result


def cmd_lookahead(args, cfg):
    from .lookahead import (lookahead_certificates, lookaplooka_transform, measure_lookahead,
                            measure_plookahead, powers_family)
    g = element_from_file(args.rule)
    family = [g] if args.single else powers_family(g, args.max_n)
    profile = measure_lookahead(family, args.max_n, cfg.budget)
    result = profile.to_json()
    result["family"] = "single" if args.single else f"powers 1..{args.max_n}"
    try:
        result["periodic"] = measure_plookahead(g, args.max_n).to_json()
    except E.NoMovingPeriodicPoint as exc:
        result["periodic"] = {"error": str(exc)}
    transformed = []
    for n, cert in sorted(profile.best.items()):
        if cert is None:
            continue
        owner = next(e for e in family if cert in lookahead_certificates(e, n, cfg.budget))
        transformed.append({"n": n, **lookaplooka_transform(owner, cert).to_json()})
    result["transformed"] = transformed
    result["open_question"] = "per-element profiles do not bound the generated group"
    result["table"] = profile.render()
    return result


def cmd_trace(args, cfg):
    from .simulation import render, trace_orbit
    g = element_from_file(args.rule)
    x = parse_configuration(args.config, g.domain.alphabet)
    tr = trace_orbit(g, x, args.steps)
    lo = min(min(tr.offsets), x.start) - 2
    hi = max(max(tr.offsets), x.end) + 2
    heads = {}
    for i, o in enumerate(tr.offsets):
        heads.setdefault(o, str(i % 10))
    text = render(x, {v: k for k, v in heads.items()}, lo, hi, g.domain.alphabet)
    return {"element": g.label, "config": x.to_literal(), "steps": args.steps,
            "trace": tr.to_json(), "rendering": text}


def cmd_beta_cancel(args, cfg):
    from .lamplighter import FiniteAbelianGroup
    from .moves import SearchPolicy, build_beta_cancel, cancellation_report, move_aithful_check
    from .sampling import random_epc
    group = FiniteAbelianGroup.parse(args.group)
    h = tuple(int(v) for v in args.h.split(",")) if args.h else group.generators()[0]
    if len(h) != len(group.orders):
        raise E.UsageError("h must have one entry per group factor")
    elems = [element_from_file(p) for p in args.elements]
    beta = build_beta_cancel(elems, h, group, cfg.equality())
    rng = np.random.default_rng(cfg.seed)
    dom = elems[0].domain
    configs = [random_epc(dom, rng) for _ in range(args.configs)]
    cancel = cancellation_report(beta, elems, configs, rng)
    search = SearchPolicy(period_bound=min(cfg.period_bound, 6))
    try:
        found = move_aithful_check(beta.support, group, search)
        found = {"config": found["config"].to_literal(), "sum": found["sum"]}
    except (E.NotFound, E.EmptySupport) as exc:
        found = {"result": type(exc).__name__, "detail": str(exc)}
    result = {"beta": beta.to_json(), "cancellation": cancel, "move_aithful": found,
              "search": {"period_bound": search.period_bound, "max_values": search.max_values}}
    if cancel["nonzero"]:
        raise Counterexample(result)
    return result


def cmd_sqrt_wreath(args, cfg):
    from .roots import check_faithful, check_wreath_law, sqrt_shift
    base = load_domain(read_json(args.sft)) if args.sft else full_shift(2)
    root = sqrt_shift(base, args.k)
    law = check_wreath_law(root, length=args.length, period_bound=cfg.period_bound)
    faithful = check_faithful(root, length=args.length, period_bound=args.faithful_bound)
    result = {"root": root.describe(), "law": law, "faithful": faithful}
    if law["failures"] or faithful["clashes"]:
        raise Counterexample(result)
    return result


# -- plumbing ---------------------------------------------------------------------


def _plain(obj):
    """JSON-safe copy with numpy scalars and tuples converted."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_literal"):
        return obj.to_literal()
    return obj


def build_parser():
    p = argparse.ArgumentParser(prog="tfg", description=__doc__)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period-bound", type=int, default=12)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--exhaustive-radius", type=int)
    p.add_argument("--budget", type=int, default=1 << 26)
    p.add_argument("--workers", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-element", help="certify that a rule is bijective")
    s.add_argument("rule")
    s.set_defaults(run=cmd_verify_element)

    s = sub.add_parser("compose", help="compose rules (leftmost acts last)")
    s.add_argument("rules", nargs="+")
    s.set_defaults(run=cmd_compose)

    s = sub.add_parser("raag", help="build and check a graph product embedding")
    s.add_argument("graph")
    s.add_argument("--word-length", type=int, default=0)
    s.set_defaults(run=cmd_raag)

    for name, fn, need in (("lamplighter", cmd_lamplighter, False), ("wreath", cmd_wreath, True)):
        s = sub.add_parser(name, help="check the A wr Z relations")
        s.add_argument("--group", required=need, help='cyclic orders of A, e.g. "2,4"')
        s.add_argument("--max-shift", type=int, default=4)
        s.add_argument("--token-bound", type=int, default=14)
        s.set_defaults(run=fn)

    s = sub.add_parser("embed-sft", help="embed a vertex shift's group into a full shift")
    s.add_argument("--sft")
    s.add_argument("--fixture", choices=["golden-mean"])
    s.add_argument("--target-alphabet", type=int, default=4)
    s.add_argument("--codebook")
    s.add_argument("--element")
    s.add_argument("--row", help="parse this row of target symbols")
    s.set_defaults(run=cmd_embed_sft)

    s = sub.add_parser("lookahead", help="measure look-ahead profiles")
    s.add_argument("rule")
    s.add_argument("--max-n", type=int, default=3)
    s.add_argument("--single", action="store_true", help="measure the element alone")
    s.add_argument("--table", action="store_true", help="print the profile table only")
    s.set_defaults(run=cmd_lookahead)

    s = sub.add_parser("trace", help="follow a head along an orbit")
    s.add_argument("rule")
    s.add_argument("--config", required=True)
    s.add_argument("--steps", type=int, default=8)
    s.add_argument("--ascii", action="store_true", help="print the rendering only")
    s.set_defaults(run=cmd_trace)

    s = sub.add_parser("beta-cancel", help="subset-sum cancellation for commuting elements")
    s.add_argument("elements", nargs="+")
    s.add_argument("--group", default="2")
    s.add_argument("--h")
    s.add_argument("--configs", type=int, default=200)
    s.set_defaults(run=cmd_beta_cancel)

    s = sub.add_parser("sqrt-wreath", help="check the root subshift wreath embedding")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--sft")
    s.add_argument("--length", type=int, default=3)
    s.add_argument("--faithful-bound", type=int, default=8)
    s.set_defaults(run=cmd_sqrt_wreath)
    return p


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    workers = os.environ.get("TFG_WORKERS")
    status, code, result, cfg = "pass", 0, None, None
    try:
        cfg = RunConfig(args.exhaustive_radius, args.period_bound, args.samples, args.budget,
                        int(workers) if workers else args.workers, args.seed)
        result = args.run(args, cfg)
    except Counterexample as exc:
        status, code, result = "counterexample", 1, exc.report
    except COUNTEREXAMPLES as exc:
        status, code = "counterexample", 1
        result = {"error": type(exc).__name__, "message": str(exc),
                  "witness": _plain(getattr(exc, "witness", None))}
    except (E.TfgError, ValueError) as exc:
        sys.stderr.write(f"tfg: {exc}\n")
        status, code = "usage-error", 2
        result = {"error": type(exc).__name__, "message": str(exc)}
    if code == 0 and getattr(args, "table", False):
        _emit(result["table"], args.out)
        return 0
    if code == 0 and getattr(args, "ascii", False):
        _emit(result["rendering"], args.out)
        return 0
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "status": status,
              "config": cfg.to_json() if cfg else None,
              "result": _plain(result)}
    _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
