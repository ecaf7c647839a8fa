"""Unique-moves and move-A-ithful searches, and the subset-sum cancellation.

All searches run over a deterministic list of configurations: purely periodic
points in order of period and word rank, then any supplied structured
configurations.  Cocycle values are read as integers on each configuration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cocycle import EqualityPolicy, TfgElement, compose, equal, evaluate, identity
from .errors import EmptySupport, NonCommuting, NotFound
from .lamplighter import FiniteAbelianGroup
from .symbolic import EPC


@dataclass
class SearchPolicy:
    period_bound: int = 6
    max_values: int = 6  # distinct cocycle values that get their own endomorphism
    extra: list = field(default_factory=list)  # structured configurations

    def configurations(self, domain):
        for p in range(1, self.period_bound + 1):
            for w in domain.periodic_words(p):
                yield EPC.periodic(w.tolist())
        yield from self.extra


@dataclass
class MoveCertificate:
    index: int
    element: str
    config: EPC
    value: int
    others: list

    def to_json(self):
        return {"index": self.index, "element": self.element, "config": self.config.to_literal(),
                "value": self.value, "others": self.others}


def _values(elements, x):
    return [evaluate(g, x) for g in elements]


def unique_moves_check(elements, search: SearchPolicy | None = None) -> MoveCertificate:
    """First (element, configuration) whose cocycle value no other element attains."""
    if not elements:
        raise EmptySupport("the element family is empty")
    search = search or SearchPolicy()
    for x in search.configurations(elements[0].domain):
        vals = _values(elements, x)
        for i, v in enumerate(vals):
            if vals.count(v) == 1:
                others = vals[:i] + vals[i + 1:]
                return MoveCertificate(i, elements[i].label or str(i), x, v, others)
    raise NotFound(f"no unique move up to period {search.period_bound}")


def lamp_sum(group: FiniteAbelianGroup, beta, values, gamma):
    """sum over g of gamma(c_g(x)) applied to beta(g); ``beta`` is a list of
    (element value, group element) pairs and gamma maps values to matrices."""
    total = group.zero
    zero = [[0] * len(group.orders) for _ in group.orders]
    for v, a in zip(values, beta):
        total = group.add(total, group.apply(gamma.get(v, zero), a))
    return total


def move_aithful_check(beta, group: FiniteAbelianGroup, search: SearchPolicy | None = None):
    """Search (x, gamma) with a nonzero lamp sum.

    ``beta`` is a list of (TfgElement, group element).  gamma ranges over
    endomorphism assignments on the first ``max_values`` attained values,
    zero elsewhere.
    """
    search = search or SearchPolicy()
    support = [(g, a) for g, a in beta if any(a)]
    if not support:
        raise EmptySupport("beta has empty support")
    elems = [g for g, _ in support]
    amounts = [a for _, a in support]
    endos = group.endomorphisms()
    for x in search.configurations(elems[0].domain):
        vals = _values(elems, x)
        attained = sorted(set(vals))[:search.max_values]
        for pick in itertools.product(range(len(endos)), repeat=len(attained)):
            gamma = {v: endos[i] for v, i in zip(attained, pick)}
            s = lamp_sum(group, amounts, vals, gamma)
            if any(s):
                return {"config": x, "gamma": {int(v): m for v, m in gamma.items()},
                        "sum": list(s), "values": vals}
    raise NotFound(f"no (x, gamma) up to period {search.period_bound}")


def _product(elements, subset, domain):
    out = identity(domain)
    for i in subset:
        out = compose(out, elements[i])
    return out


def check_commuting(elements, policy: EqualityPolicy):
    for i, j in itertools.combinations(range(len(elements)), 2):
        gh = compose(elements[i], elements[j])
        hg = compose(elements[j], elements[i])
        v = equal(gh, hg, policy)
        if not v.equal:
            raise NonCommuting(f"elements {i} and {j} do not commute", v.witness)


@dataclass
class BetaMap:
    group: FiniteAbelianGroup
    entries: list  # (representative element, group element, subsets)
    exact: bool
    tier: str
    h: tuple = ()

    @property
    def support(self):
        return [(g, a) for g, a, _ in self.entries if any(a)]

    def value_of(self, idx):
        return self.entries[idx][1]

    def to_json(self):
        return {"entries": [{"element": g.label, "value": list(a), "subsets": [list(s) for s in ss]}
                            for g, a, ss in self.entries],
                "exact": self.exact, "tier": self.tier, "nonzero": bool(self.support)}


def build_beta_cancel(elements, h, group: FiniteAbelianGroup,
                      policy: EqualityPolicy | None = None) -> BetaMap:
    """beta(g) = sum of (-1)^|I| h over subsets I whose product g_I equals g."""
    policy = policy or EqualityPolicy(samples=0)
    domain = elements[0].domain
    check_commuting(elements, policy)
    entries = []
    exact = True
    tiers = set()
    for n in range(len(elements) + 1):
        for subset in itertools.combinations(range(len(elements)), n):
            g = _product(elements, subset, domain)
            g.label = "g{" + ",".join(map(str, subset)) + "}"
            amount = h if n % 2 == 0 else group.neg(h)
            for e in entries:
                v = equal(e[0], g, policy)
                tiers.add(v.tier)
                exact &= v.exact
                if v.equal:
                    e[1] = group.add(e[1], amount)
                    e[2].append(subset)
                    break
            else:
                entries.append([g, amount, [subset]])
    return BetaMap(group, [tuple(e) for e in entries], exact,
                   "/".join(sorted(tiers)) or "none", tuple(h))


def subset_sum(beta: BetaMap, elements, x, gamma):
    """The lamp sum computed subset by subset, without any grouping."""
    g = beta.group
    total = g.zero
    zero = [[0] * len(g.orders) for _ in g.orders]
    domain = elements[0].domain
    for n in range(len(elements) + 1):
        for subset in itertools.combinations(range(len(elements)), n):
            v = evaluate(_product(elements, subset, domain), x)
            a = g.neg(beta.h) if n % 2 else beta.h
            total = g.add(total, g.apply(gamma.get(v, zero), a))
    return total


def stabilized(elements, x) -> list:
    """Indices of elements that fix x exactly (cocycle 0)."""
    return [i for i, g in enumerate(elements) if evaluate(g, x) == 0]


def cancellation_report(beta: BetaMap, elements, configs, rng, gammas_per_config=8) -> dict:
    """Lamp sums on configurations with a stabilizer, for random gamma."""
    g = beta.group
    endos = g.endomorphisms()
    checked = 0
    nonzero = []
    for x in configs:
        if not stabilized(elements, x):
            continue
        vals = [evaluate(e, x) for e, _ in beta.support]
        amounts = [a for _, a in beta.support]
        attained = sorted(set(vals))
        for _ in range(gammas_per_config):
            gamma = {v: endos[int(rng.integers(0, len(endos)))] for v in attained}
            s = lamp_sum(g, amounts, vals, gamma)
            checked += 1
            if any(s):
                nonzero.append({"config": x.to_literal(), "sum": list(s)})
    return {"checked": checked, "nonzero": nonzero}
