"""Sampled test batteries for the lemmas and the extension properties.

Each battery returns a :class:`~assgp.report.Report`.  They back both the
``assgp verify lemmas`` command and the acceptance tests.
"""
from __future__ import annotations

import random

from .canonical import enumerate_level, letter_budget, letter_sum, sample_tree
from .lemmas import (
    assgp_extend,
    eta_equality,
    eta_instance_from_tree,
    random_eta_instance,
    random_sandwich,
    sandwich_reduce,
    LemmaViolation,
)
from .report import Report
from .systems import (
    InWithCert,
    NbhdSystem,
    check_certificate,
    closure_seed,
    cyclic_enrich,
    enrich,
    pad_extend,
    retract_tree,
    seed_system,
    member_decide,
)
from .trees import CertificateError
from .words import Word, lett, mul, product, retract

X0, X1 = Word((1,)), Word((2,))


def _y(i: int) -> Word:
    return Word((i + 1,))


def base_systems() -> list[NbhdSystem]:
    """Seeds and paddings over ``{x0}`` and ``{x0, x1}`` with nontrivial levels."""
    return [
        seed_system({0}, 0),
        seed_system({0, 1}, 2),
        closure_seed({0}, 1, [X0]),
        closure_seed({0, 1}, 1, [mul(X0, X1)]),
        closure_seed({0}, 2, [X0]),
        pad_extend(closure_seed({0}, 1, [X0]), 3),
        pad_extend(seed_system({0, 1}, 0), 2),
    ]


def fresh_enrichments() -> list[NbhdSystem]:
    """Ten cyclic enrichments by fresh letters over varied bases."""
    b = base_systems()
    return [
        cyclic_enrich(b[0], [_y(5)]),
        cyclic_enrich(b[1], [_y(5), _y(6)]),
        cyclic_enrich(b[2], [_y(5)]),
        cyclic_enrich(b[2], [_y(5), _y(6), _y(7)]),
        cyclic_enrich(b[3], [_y(5)]),
        cyclic_enrich(b[4], [_y(5)]),
        cyclic_enrich(b[4], [_y(5), _y(6)]),
        cyclic_enrich(b[5], [_y(5)]),
        cyclic_enrich(b[6], [_y(5), _y(6)]),
        cyclic_enrich(cyclic_enrich(b[2], [_y(5)]), [_y(6)]),
    ]


def condition_systems() -> list[NbhdSystem]:
    """Twenty systems spanning every construction: seeds, paddings, cyclic and B-enrichments."""
    b = base_systems()
    y5, y6 = _y(5), _y(6)
    out = list(b)
    out += fresh_enrichments()[:7]
    out += [
        enrich(b[2], words=[mul(y5, y6)], cyclic=[y5]),
        enrich(b[3], words=[mul(X0, y5)]),
        enrich(pad_extend(b[2], 2), words=[mul(y5, X0)], cyclic=[mul(y5, y6)]),
        enrich(b[4], words=[mul(mul(y5, X0), y5)], cyclic=[y6]),
        enrich(b[1], cyclic=[mul(X0, X1)]),
        pad_extend(fresh_enrichments()[2], 3),
    ]
    return out


# -- batteries ---------------------------------------------------------------------------

def sandwich_battery(count: int = 1000, seed: int = 0) -> Report:
    rng = random.Random(seed)
    rep = Report("sandwich reduction")
    bad = []
    removed = 0
    for _ in range(count):
        inst = random_sandwich(rng)
        trace: list = []
        try:
            out = sandwich_reduce(inst, trace)
            if out != product(inst.pieces()):
                bad.append("result differs from direct reduction")
        except (AssertionError, LemmaViolation) as exc:
            bad.append(str(exc))
        removed += len(trace)
    rep.tally("deleted-filler word equals direct reduction", count, bad)
    rep.stats["sandwiches_removed"] = removed
    return rep


def eta_battery(count: int = 1000, seed: int = 0) -> Report:
    """Half structured instances, half taken from certificates of an ASSGP enrichment."""
    rng = random.Random(seed)
    rep = Report("eta equality")
    bad = []
    structured = count - count // 2
    for _ in range(structured):
        factors, g0, letter = random_eta_instance(rng)
        try:
            if not eta_equality(factors, g0, letter).holds:
                bad.append("structured instance: sides differ")
        except (AssertionError, LemmaViolation) as exc:
            bad.append(str(exc))
    # Bridged level-0 certificates of an ASSGP enrichment: x (a g0^q)(g0^-q b) x^-1
    # and deeper variants.  Only instances that really contain powers of g0 count.
    wit = assgp_extend(closure_seed({0}, 2, [X0]), X0)
    derived = 0
    attempts = 0
    while derived < count // 2 and attempts < 100 * count:
        attempts += 1
        t = sample_tree(wit.system, 0, rng, max_exponent=3, conj_prob=1.0, bridge_prob=0.9,
                        focus=(wit.g0,))
        inst = eta_instance_from_tree(t, wit)
        if inst is None or not any(inst[2] in lett(a) for a in inst[0]):
            continue
        derived += 1
        factors, g0, letter = inst
        try:
            if not eta_equality(factors, g0, letter).holds:
                bad.append("certificate instance: sides differ")
        except (AssertionError, LemmaViolation) as exc:
            bad.append(str(exc))
    rep.tally("collapse keeps the product", structured + derived, bad)
    rep.stats.update(structured=structured, derived=derived, attempts=attempts)
    return rep


def letter_bound_battery(systems: list[NbhdSystem] | None = None, exponent: int = 8,
                         cap: int = 4000, samples: int = 300, seed: int = 0) -> Report:
    """Σ|lett(a_l)| <= |X| 4^(n-i) for enumerated and sampled trees of fresh-letter enrichments."""
    systems = systems if systems is not None else fresh_enrichments()
    rng = random.Random(seed)
    rep = Report("letter bound")
    bad = []
    worst = 0.0
    checked = 0
    for s in systems:
        if not s.retraction_safe or s.depth > 3:
            continue
        base_size = len(s.parent.alphabet)
        n = s.depth
        for i in range(n + 1):
            trees = [t for _, t in enumerate_level(s, i, n - i, exponent, cap=cap)]
            trees += [sample_tree(s, i, rng, exponent) for _ in range(samples)]
            for t in trees:
                checked += 1
                total = letter_sum(t)
                budget = letter_budget(i, n, base_size)
                worst = max(worst, total / budget)
                if total > budget:
                    bad.append(f"{s.hash[:8]} level {i}: {total} > {budget}")
    rep.tally("letter bound", checked, bad)
    rep.stats["max_ratio"] = worst
    return rep


def retraction_battery(systems: list[NbhdSystem] | None = None, count: int = 1000,
                       seed: int = 0) -> Report:
    """π_X of certified elements of V_i is certified in U_i (decided and constructed)."""
    systems = systems if systems is not None else fresh_enrichments()
    rng = random.Random(seed)
    rep = Report("retraction")
    bad = []
    for k in range(count):
        s = systems[k % len(systems)]
        i = rng.randrange(s.depth + 1)
        t = sample_tree(s, i, rng)
        image = retract(s.parent.alphabet, t.word)
        v = member_decide(s.parent, i, image)
        if not isinstance(v, InWithCert):
            bad.append(f"{s.hash[:8]} level {i}: retraction not certified ({type(v).__name__})")
            continue
        try:
            if check_certificate(s.parent, retract_tree(s, t), i) != image:
                bad.append("constructed retraction certifies a different word")
        except CertificateError as exc:
            bad.append(str(exc))
    rep.tally("retraction lands in U_i", count, bad)
    return rep


def trace_battery(systems: list[NbhdSystem] | None = None, count: int = 1000,
                  seed: int = 0) -> Report:
    """Certified elements of V_i over the old alphabet are decided into U_i."""
    systems = systems if systems is not None else fresh_enrichments()
    rng = random.Random(seed)
    rep = Report("trace")
    bad = []
    applicable = 0
    nontrivial = 0
    for k in range(count):
        s = systems[k % len(systems)]
        i = rng.randrange(s.depth + 1)
        t = sample_tree(s, i, rng, bridge_prob=0.5)
        if not lett(t.word) <= s.parent.alphabet:
            continue
        applicable += 1
        if t.word:
            nontrivial += 1
        v = member_decide(s.parent, i, t.word)
        if not isinstance(v, InWithCert):
            bad.append(f"{s.hash[:8]} level {i}: {list(t.word)} not decided into U_i")
    rep.tally("V_i ∩ F(X) decided into U_i", applicable, bad)
    rep.stats.update(applicable=applicable, nontrivial=nontrivial)
    return rep


def run_lemma_batteries(samples: int = 1000, seed: int = 0) -> Report:
    rep = Report("lemma batteries")
    for sub in (sandwich_battery(samples, seed), eta_battery(samples, seed),
                letter_bound_battery(seed=seed), retraction_battery(count=samples, seed=seed),
                trace_battery(count=samples, seed=seed)):
        rep.merge(sub, sub.name + ": ")
        for k, v in sub.stats.items():
            rep.stats[f"{sub.name}.{k}"] = v
    return rep
