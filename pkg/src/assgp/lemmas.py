"""The three rewriting and extension lemmas behind the ASSGP construction.

* :func:`sandwich_reduce` deletes ``g0``-fillers from a product by repeatedly
  removing a trivial sandwich ``v, e, v^-1``.
* :func:`eta_equality` checks that sending every power of ``g0`` to ``e`` in a
  factor sequence leaves the product unchanged, and proves it by rebuilding
  the sequence as a sandwich instance.
* :func:`assgp_extend` builds the extended system and the factorisation of
  ``g`` into elements whose whole cyclic subgroups sit in the bottom level.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .canonical import enumerate_level, letter_budget, letter_sum, sample_tree
from .report import Report
from .systems import (
    NbhdSystem,
    check_certificate,
    cyclic_enrich,
    enrich,
    eta_collapse,
    is_extension,
    lower,
    verify_system,
)
from .trees import CertificateError, CyclicPower, Tree, flatten
from .words import (
    E,
    AlphabetRegistry,
    Word,
    cyclic_member,
    gen_of,
    inv,
    lett,
    mul,
    power,
    product,
    random_word,
)


class LemmaViolation(ValueError):
    """A lemma's hypothesis does not hold for the given instance."""

    def __init__(self, clause: str, message: str):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


def occurrences(w: Word, gen: int) -> int:
    return sum(1 for c in w if gen_of(c) == gen)


# -- trivial sandwiches -------------------------------------------------------------

@dataclass(frozen=True)
class SandwichInstance:
    g0: Word
    letter: int
    walls: tuple
    signs: tuple  # +1 for g0, -1 for g0^-1

    @property
    def fillers(self) -> list[Word]:
        g0i = inv(self.g0)
        return [self.g0 if s > 0 else g0i for s in self.signs]

    def pieces(self) -> list[Word]:
        out = [self.walls[0]]
        for v, w in zip(self.fillers, self.walls[1:]):
            out += [v, w]
        return out

    def direct(self) -> Word:
        return product(self.pieces())

    def validate(self) -> None:
        if len(self.walls) != len(self.signs) + 1:
            raise LemmaViolation("shape", "need exactly one more wall than fillers")
        if any(s not in (1, -1) for s in self.signs):
            raise LemmaViolation("shape", "filler signs must be +1 or -1")
        if occurrences(self.g0, self.letter) != 1:
            raise LemmaViolation("(i)", "the distinguished letter must occur exactly once in g0")
        for k, w in enumerate(self.walls):
            if self.letter in lett(w):
                raise LemmaViolation("(ii)", f"wall {k} contains the distinguished letter")
        if self.letter in lett(self.direct()):
            raise LemmaViolation("(iii)", "the full product contains the distinguished letter")


def sandwich_reduce(inst: SandwichInstance, trace: list | None = None) -> Word:
    """Delete all fillers, one trivial sandwich at a time.

    Under the hypotheses some adjacent pair of fillers must be mutually inverse
    with an identity wall between them (the innermost pair of cancelling
    occurrences of the distinguished letter); removing it and merging the two
    outer walls keeps the product and the hypotheses.  The final single wall is
    compared against direct reduction.
    """
    inst.validate()
    walls = list(inst.walls)
    signs = list(inst.signs)
    while signs:
        for i in range(len(signs) - 1):
            if not walls[i + 1] and signs[i + 1] == -signs[i]:
                if trace is not None:
                    trace.append(i)
                merged = mul(walls[i], walls[i + 2])
                walls[i : i + 3] = [merged]
                del signs[i : i + 2]
                break
        else:
            raise LemmaViolation("(iii)", "no trivial sandwich left to remove")
    result = walls[0]
    direct = inst.direct()
    if result != direct:
        raise AssertionError("sandwich reduction disagrees with direct reduction")
    return result


def _identity_items(rng: random.Random, depth: int, alphabet: tuple, max_len: int) -> list:
    """Items ``("w", word)`` / ``("f", sign)`` whose product is ``e``."""
    if depth <= 0:
        return []
    r = rng.random()
    if r < 0.4:
        s = rng.choice((1, -1))
        return [("f", s)] + _identity_items(rng, depth - 1, alphabet, max_len) + [("f", -s)]
    if r < 0.7:
        w = random_word(rng, alphabet, rng.randint(1, max_len))
        return [("w", w)] + _identity_items(rng, depth - 1, alphabet, max_len) + [("w", inv(w))]
    if r < 0.9:
        return (_identity_items(rng, depth - 1, alphabet, max_len)
                + _identity_items(rng, depth - 1, alphabet, max_len))
    return []


def random_g0(rng: random.Random, alphabet: tuple, letter: int, max_len: int = 4) -> Word:
    a = random_word(rng, alphabet, rng.randint(0, max_len))
    c = random_word(rng, alphabet, rng.randint(0, max_len))
    x = letter + 1 if rng.random() < 0.5 else -(letter + 1)
    return product([a, Word((x,)), c])


def random_sandwich(rng: random.Random, n_letters: int = 3, depth: int = 4,
                    max_len: int = 4) -> SandwichInstance:
    """A sandwich instance satisfying (i)-(iii) by construction."""
    alphabet = tuple(range(n_letters))
    letter = n_letters
    g0 = random_g0(rng, alphabet, letter, max_len)
    items: list = []
    for _ in range(rng.randint(1, 3)):
        items.append(("w", random_word(rng, alphabet, rng.randint(0, max_len))))
        items += _identity_items(rng, depth, alphabet, max_len)
    items.append(("w", random_word(rng, alphabet, rng.randint(0, max_len))))
    walls: list[Word] = [E]
    signs: list[int] = []
    for kind, val in items:
        if kind == "w":
            walls[-1] = mul(walls[-1], val)
        else:
            signs.append(val)
            walls.append(E)
    return SandwichInstance(g0, letter, tuple(walls), tuple(signs))


# -- the collapse equality -----------------------------------------------------------

@dataclass(frozen=True)
class EtaResult:
    holds: bool
    lhs: Word
    rhs: Word
    collapsed: tuple


def eta_hypotheses(factors: Sequence[Word], g0: Word, letter: int) -> list[int]:
    """Validate (a)-(c); returns the exponents of ``g0`` (0 for other factors)."""
    if occurrences(g0, letter) != 1:
        raise LemmaViolation("(a)", "the distinguished letter must occur exactly once in g0")
    if letter in lett(product(factors)):
        raise LemmaViolation("(b)", "the product contains the distinguished letter")
    exps = []
    for k, a in enumerate(factors):
        if letter in lett(a):
            q = cyclic_member(a, g0)
            if q is None or q == 0:
                raise LemmaViolation("(c)", f"factor {k} contains the letter but is not a nonzero power of g0")
            exps.append(q)
        else:
            exps.append(0)
    return exps


def eta_equality(factors: Sequence[Word], g0: Word, letter: int) -> EtaResult:
    """Compare ``a_1...a_m`` with the product after sending powers of ``g0`` to ``e``.

    Both sides are computed by exact reduction.  The equality is also derived
    by expanding every ``g0^q`` into ``|q|`` fillers and running
    :func:`sandwich_reduce` on the resulting instance.
    """
    factors = [Word(a) for a in factors]
    exps = eta_hypotheses(factors, g0, letter)
    collapsed = tuple(E if q else a for a, q in zip(factors, exps))
    lhs = product(factors)
    rhs = product(collapsed)
    walls: list[Word] = [E]
    signs: list[int] = []
    for a, q in zip(factors, exps):
        if q == 0:
            walls[-1] = mul(walls[-1], a)
        else:
            for _ in range(abs(q)):
                signs.append(1 if q > 0 else -1)
                walls.append(E)
    via_sandwich = sandwich_reduce(SandwichInstance(g0, letter, tuple(walls), tuple(signs)))
    if via_sandwich != rhs:
        raise AssertionError("sandwich derivation disagrees with the collapsed product")
    return EtaResult(lhs == rhs, lhs, rhs, collapsed)


def random_eta_instance(rng: random.Random, n_letters: int = 3, depth: int = 4,
                        max_len: int = 4, max_power: int = 3) -> tuple:
    """``(factors, g0, letter)`` satisfying (a)-(c) by construction."""
    inst = random_sandwich(rng, n_letters, depth, max_len)
    factors: list[Word] = []
    pending = 0

    def flush() -> None:
        nonlocal pending
        while pending:
            step = rng.randint(1, min(abs(pending), max_power))
            step = step if pending > 0 else -step
            factors.append(power(inst.g0, step))
            pending -= step

    for k, w in enumerate(inst.walls):
        if w:
            flush()
            cut = rng.randint(0, len(w))
            for piece in (Word(w[:cut]), Word(w[cut:])):
                if piece:
                    factors.append(piece)
        if k < len(inst.signs):
            s = inst.signs[k]
            if pending and (pending > 0) != (s > 0):
                flush()
            pending += s
    flush()
    return factors, inst.g0, inst.letter


# -- ASSGP extension -----------------------------------------------------------------

@dataclass(frozen=True)
class CycFactor:
    """A factor ``descriptor ** sign`` whose cyclic subgroup is a bottom-level descriptor."""

    word: Word
    descriptor: Word
    sign: int
    system: str  # hash of the system whose bottom level lists the descriptor

    def to_json(self) -> dict:
        return {"word": list(self.word), "descriptor": list(self.descriptor), "sign": self.sign,
                "system": self.system}

    def inverse(self) -> "CycFactor":
        return CycFactor(inv(self.word), self.descriptor, -self.sign, self.system)


@dataclass
class AssgpWitness:
    base: NbhdSystem
    system: NbhdSystem
    g: Word
    g0: Word
    k: int
    fresh: tuple
    factors: list

    def product(self) -> Word:
        return product(f.word for f in self.factors)

    def power_certificate(self, index: int, q: int, level: int | None = None) -> Tree:
        """Certificate in ``system`` that ``factor^q`` lies in ``level`` (default: bottom)."""
        f = self.factors[index]
        n = self.system.depth
        t = CyclicPower(n, f.descriptor, f.sign * q, power(f.descriptor, f.sign * q))
        return t if level is None else lower(self.system, t, level)

    def check(self, spot: int = 10, levels: Sequence[int] | None = None) -> Report:
        rep = Report("assgp-witness")
        ok = self.product() == self.g
        rep.add("factorisation folds to g", ok, 1, 0 if ok else 1)
        bad = []
        for f in self.factors:
            if f.system != self.system.hash or f.descriptor not in self.system.bottom_cyclic:
                bad.append(f"{list(f.word)} is not a bottom-level cyclic descriptor")
            elif power(f.descriptor, f.sign) != f.word:
                bad.append(f"{list(f.word)} does not match its descriptor")
        rep.tally("factors are cyclic descriptors", len(self.factors), bad)
        bad = []
        checked = 0
        for lvl in (levels if levels is not None else [self.system.depth]):
            for idx in range(len(self.factors)):
                for q in range(-spot, spot + 1):
                    checked += 1
                    try:
                        t = self.power_certificate(idx, q, lvl)
                        w = check_certificate(self.system, t, lvl)
                        if w != power(self.factors[idx].word, q):
                            bad.append("power certificate word mismatch")
                    except CertificateError as exc:
                        bad.append(str(exc))
        rep.tally(f"powers |q| <= {spot} certified", checked, bad)
        return rep

    def to_json(self) -> dict:
        return {
            "base": self.base.hash,
            "system": self.system.hash,
            "g": list(self.g),
            "g0": list(self.g0),
            "k": self.k,
            "fresh": list(self.fresh),
            "factors": [f.to_json() for f in self.factors],
        }


def fresh_count(base: NbhdSystem) -> int:
    """The smallest legal number of fresh letters, ``|X| * 4^n + 1``."""
    return len(base.alphabet) * 4 ** base.depth + 1


def assgp_extend(base: NbhdSystem, g: Word, registry: AlphabetRegistry | None = None,
                 stage: int = 0) -> AssgpWitness:
    """Extend ``base`` so that ``g`` is a product of elements with cyclic subgroups in the bottom level."""
    if not base.alphabet:
        raise ValueError("the base alphabet is empty")
    g = Word(g)
    if not lett(g) <= base.alphabet:
        raise ValueError("g uses letters outside the base alphabet; grow the alphabet first")
    k = fresh_count(base)
    if registry is not None:
        fresh = tuple(gen.id for gen in registry.fresh(k, stage))
    else:
        start = max(base.alphabet) + 1
        fresh = tuple(range(start, start + k))
    if set(fresh) & base.alphabet:
        raise ValueError("fresh letters collide with the base alphabet")
    ys = [Word((y + 1,)) for y in fresh]
    g0 = mul(Word(tuple(y + 1 for y in fresh)), g)
    alphabet = base.alphabet | frozenset(fresh)
    companion = cyclic_enrich(base, ys, alphabet=alphabet)
    detail = {"g": list(g), "g0": list(g0), "k": k, "fresh": list(fresh)}
    system = enrich(base, cyclic=ys + [g0], alphabet=alphabet, subkind="assgp", detail=detail,
                    extends_parent=True, companion=companion)
    h = system.hash
    factors = [CycFactor(inv(y), y, -1, h) for y in reversed(ys)] + [CycFactor(g0, g0, 1, h)]
    return AssgpWitness(base, system, g, g0, k, fresh, factors)


def verify_assgp(w: AssgpWitness, samples: int = 200, seed: int = 0, max_exponent: int = 8,
                 enum_cap: int = 300) -> Report:
    """Run every check the extension argument relies on."""
    rep = Report(f"assgp-extension k={w.k}")
    rep.merge(w.check(), "witness: ")
    rep.merge(verify_system(w.system, samples, seed, max_exponent), "system: ")
    rep.merge(is_extension(w.system, w.base, samples, seed, max_exponent), "extension: ")
    rep.merge(is_extension(w.system.companion, w.base, samples, seed + 1, max_exponent), "companion: ")

    bad = []
    for q in range(-8, 9):
        if q and len(lett(power(w.g0, q))) < w.k:
            bad.append(f"q={q}")
    rep.tally("fresh letters survive in powers of g0", 16, bad)

    companion = w.system.companion
    n = companion.depth
    base_size = len(w.base.alphabet)
    rng = random.Random(seed)
    trees: list[Tree] = []
    for i in range(n + 1):
        trees += [t for _, t in enumerate_level(companion, i, n - i, max_exponent, cap=enum_cap)]
        trees += [sample_tree(companion, i, rng, max_exponent) for _ in range(samples)]
    bound_bad, excl_bad = [], []
    worst = 0.0
    for t in trees:
        s = letter_sum(t)
        budget = letter_budget(t.level, n, base_size)
        worst = max(worst, s / budget)
        if s > budget:
            bound_bad.append(f"level {t.level}: {s} > {budget}")
        if s >= w.k:
            bound_bad.append("letter count reaches k")
        if t.word and cyclic_member(t.word, w.g0) is not None:
            excl_bad.append(f"level {t.level}: {list(t.word)} is a power of g0")
    rep.tally("letter bound in the companion", len(trees), bound_bad)
    rep.tally("companion levels avoid <g0> minus e", len(trees), excl_bad)
    rep.stats["max_letter_ratio"] = worst

    applicable = 0
    eta_bad = []
    for i in range(n + 1):
        for _ in range(samples):
            t = sample_tree(w.system, i, rng, max_exponent)
            try:
                collapsed = eta_collapse(t, w.system)
                check_certificate(companion, collapsed, i)
            except CertificateError as exc:
                eta_bad.append(str(exc))
                continue
            if eta_instance_from_tree(t, w) is not None:
                applicable += 1
                if collapsed.word != t.word:
                    eta_bad.append(f"level {i}: collapse changed the word")
    rep.tally("eta-collapse keeps the word when a fresh letter is free", applicable, eta_bad)
    rep.stats["eta_applicable"] = applicable
    return rep


def eta_instance_from_tree(t: Tree, w: AssgpWitness) -> tuple | None:
    """Turn a sampled certificate into a collapse-lemma instance, if one fits.

    An instance exists when some fresh letter is absent from the word and from
    every factor other than the powers of ``g0``.
    """
    g0, g0i = w.g0, inv(w.g0)
    used = set(lett(t.word))
    for f in flatten(t):
        if f.origin == "cyclic-power" and f.base in (g0, g0i):
            continue
        used |= lett(f.word)
    for y in w.fresh:
        if y not in used:
            return flatten(t).words, g0, y
    return None
