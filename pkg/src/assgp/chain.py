"""Conditions, dense-set refiners, the generic chain and the topology oracle.

A condition is a stage of the chain: an alphabet, a depth and a system.  Each
task names a dense set; the builder first looks for an existing stage inside
that set (latest first) and only refines the tail when none qualifies.  The
level-wise unions of the stages form the neighbourhood base ``U_n`` of the
final topology, which :class:`TopologyOracle` queries with certificates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .canonical import sample_tree
from .lemmas import AssgpWitness, CycFactor, assgp_extend, verify_assgp
from .report import Report
from .systems import (
    ExclusionProof,
    InWithCert,
    NbhdSystem,
    NotInProven,
    SearchBudget,
    Unknown,
    Verdict,
    check_certificate,
    check_exclusion,
    conjugate_certificate,
    cyclic_enrich,
    identity_certificate,
    is_extension,
    lift,
    lower,
    member_decide,
    pad_extend,
    product_certificate,
    seed_system,
    verify_system,
)
from .trees import CertificateError, CyclicPower, Tree, invert_tree
from .words import E, AlphabetRegistry, Word, inv, lett, mul, power, product, words_up_to


# -- tasks ------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthTask:
    n: int


@dataclass(frozen=True)
class AlphabetTask:
    letters: frozenset


@dataclass(frozen=True)
class SepTask:
    g: Word


@dataclass(frozen=True)
class AssgpTask:
    g: Word
    n: int


Task = Union[DepthTask, AlphabetTask, SepTask, AssgpTask]


def task_to_json(task: Task, registry: AlphabetRegistry) -> dict:
    if isinstance(task, DepthTask):
        return {"type": "depth", "n": task.n}
    if isinstance(task, AlphabetTask):
        return {"type": "alphabet", "letters": [registry[i].name for i in sorted(task.letters)]}
    if isinstance(task, SepTask):
        return {"type": "separate", "g": registry.format(task.g)}
    return {"type": "assgp", "g": registry.format(task.g), "n": task.n}


def task_from_json(d: dict, registry: AlphabetRegistry) -> Task:
    kind = d.get("type")
    if kind == "depth":
        return DepthTask(int(d["n"]))
    if kind == "alphabet":
        return AlphabetTask(frozenset(registry.ensure_name(s).id for s in d["letters"]))
    if kind == "separate":
        return SepTask(registry.parse(d["g"]))
    if kind == "assgp":
        return AssgpTask(registry.parse(d["g"]), int(d["n"]))
    raise ValueError(f"unknown task type {kind!r}")


def task_label(task: Task, registry: AlphabetRegistry) -> str:
    if isinstance(task, DepthTask):
        return f"A_{task.n}"
    if isinstance(task, AlphabetTask):
        return "B_{" + ",".join(registry[i].name for i in sorted(task.letters)) + "}"
    if isinstance(task, SepTask):
        return f"C[{registry.format(task.g)}]"
    return f"A_{task.n}∩D[{registry.format(task.g)}]"


@dataclass(frozen=True)
class Schedule:
    tasks: tuple
    seed_letters: int = 1
    seed_depth: int = 0
    params: dict = field(default_factory=dict)

    def to_json(self, registry: AlphabetRegistry) -> dict:
        return {"seed_letters": self.seed_letters, "seed_depth": self.seed_depth,
                "params": self.params, "tasks": [task_to_json(t, registry) for t in self.tasks]}

    @classmethod
    def from_json(cls, d: dict, registry: AlphabetRegistry) -> "Schedule":
        if "tasks" not in d:
            raise ValueError("schedule needs a 'tasks' list")
        seed_letters = int(d.get("seed_letters", 1))
        registry.seed(seed_letters)
        tasks = tuple(task_from_json(t, registry) for t in d["tasks"])
        return cls(tasks, seed_letters, int(d.get("seed_depth", 0)), dict(d.get("params", {})))


def default_schedule(registry: AlphabetRegistry, max_word_len: int = 4, generators: int = 3,
                     max_depth: int = 3) -> Schedule:
    """Depth first, then alphabet and ASSGP tasks by increasing word length, then separation.

    Words are all reduced words of length at most ``max_word_len`` over
    ``x0 .. x{generators-1}`` in length-lex order.
    """
    gens = [g.id for g in registry.seed(generators)]
    words = list(words_up_to(gens, max_word_len))
    tasks: list[Task] = [DepthTask(max_depth)]
    for g in words:
        if g:
            tasks.append(AlphabetTask(lett(g)))
        for n in range(max_depth + 1):
            tasks.append(AssgpTask(g, n))
    for g in words:
        if g:
            tasks.append(SepTask(g))
    params = {"max_word_len": max_word_len, "generators": generators, "max_depth": max_depth}
    return Schedule(tuple(tasks), 1, 0, params)


# -- conditions and chain state -----------------------------------------------------

@dataclass
class Condition:
    system: NbhdSystem
    index: int
    label: str
    parent: int | None

    @property
    def alphabet(self) -> frozenset:
        return self.system.alphabet

    @property
    def depth(self) -> int:
        return self.system.depth


@dataclass
class TaskRecord:
    task: Task
    stage: int
    action: str  # "met" (an existing stage already lay in the dense set) or "refined"
    factors: tuple = ()
    proof: ExclusionProof | None = None


@dataclass
class ChainConfig:
    seed: int = 0
    leq_samples: int = 150
    verify_samples: int = 150
    max_exponent: int = 8
    budget: SearchBudget = field(default_factory=SearchBudget)


class ChainState:
    def __init__(self, registry: AlphabetRegistry, seed_condition: NbhdSystem,
                 config: ChainConfig | None = None):
        self.registry = registry
        self.config = config or ChainConfig()
        self.stages: list[Condition] = [Condition(seed_condition, 0, "seed", None)]
        self.log: list[TaskRecord] = []
        self.by_task: dict[Task, TaskRecord] = {}
        self.witnesses: dict[Word, AssgpWitness] = {}
        self.reports: list[Report] = []
        self._descriptors: dict[int, dict] = {}

    @property
    def tail(self) -> Condition:
        return self.stages[-1]

    @property
    def final(self) -> NbhdSystem:
        return self.tail.system

    def push(self, system: NbhdSystem, label: str) -> Condition:
        prev = self.tail
        if system is prev.system:
            return prev
        cond = Condition(system, len(self.stages), label, prev.index)
        self.stages.append(cond)
        cfg = self.config
        rng_seed = cfg.seed + cond.index
        rep = leq(cond, prev, cfg.leq_samples, rng_seed, cfg.max_exponent)
        rep.name = f"stage {cond.index} ({label}) <= stage {prev.index}"
        self.reports.append(rep)
        vrep = verify_system(system, cfg.verify_samples, rng_seed, cfg.max_exponent)
        vrep.name = f"stage {cond.index} ({label}) conditions"
        self.reports.append(vrep)
        return cond

    def record(self, task: Task, stage: int, action: str, **kw) -> TaskRecord:
        rec = TaskRecord(task, stage, action, **kw)
        self.log.append(rec)
        self.by_task[task] = rec
        return rec

    def top_descriptors(self, index: int) -> dict:
        """Cyclic descriptors of the top level of a stage, mapped to the system defining them."""
        if index not in self._descriptors:
            s = self.stages[index].system
            depth = s.depth
            out: dict[Word, NbhdSystem] = {}
            while s is not None and s.depth == depth and s.kind == "enrichment":
                for c in s.levels[-1].cyclic:
                    out.setdefault(c, s)
                    out.setdefault(inv(c), s)
                s = s.parent
            self._descriptors[index] = out
        return self._descriptors[index]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.reports)


def leq(q: Condition | NbhdSystem, p: Condition | NbhdSystem, samples: int = 150, seed: int = 0,
        max_exponent: int = 8) -> Report:
    """``q <= p`` in the poset: the system of ``q`` extends that of ``p``."""
    qs = q.system if isinstance(q, Condition) else q
    ps = p.system if isinstance(p, Condition) else p
    return is_extension(qs, ps, samples, seed, max_exponent)


# -- refiners ----------------------------------------------------------------------------

def refine_depth(system: NbhdSystem, n: int) -> NbhdSystem:
    return system if n <= system.depth else pad_extend(system, n)


def refine_alphabet(system: NbhdSystem, letters: Iterable[int]) -> NbhdSystem:
    new = sorted(frozenset(letters) - system.alphabet)
    if not new:
        return system
    return cyclic_enrich(system, [Word((i + 1,)) for i in new], alphabet=system.alphabet | frozenset(new))


def refine_separate(system: NbhdSystem, g: Word) -> NbhdSystem:
    """Grow the alphabet to cover ``g``, then pad one ``{e}`` level, which excludes ``g``.

    The chain builder skips the padding when an existing stage already
    excludes ``g`` at its top level; this function always performs it.
    """
    if not g:
        raise ValueError("the identity cannot be separated")
    system = refine_alphabet(system, lett(g))
    return pad_extend(system, system.depth + 1)


def cover(state: ChainState, index: int, g: Word) -> tuple | None:
    """Factor ``g`` over cyclic descriptors of a stage's top level, if possible.

    Tries ``g`` itself, a stored witness for ``g``, and then letter by letter
    (each letter being a descriptor or having a stored witness; inverse
    letters use the reversed, inverted factor list).
    """
    if not g:
        return (CycFactor(E, E, 0, ""),)
    cond = state.stages[index]
    if not lett(g) <= cond.alphabet:
        return None
    desc = state.top_descriptors(index)

    def single(w: Word) -> tuple | None:
        if w in desc:
            s = desc[w]
            base = w if w in s.levels[-1].cyclic else inv(w)
            return (CycFactor(w, base, 1 if base == w else -1, s.hash),)
        wit = state.witnesses.get(w)
        if wit is not None and all(f.descriptor in desc and desc[f.descriptor].hash == f.system
                                   for f in wit.factors):
            return tuple(wit.factors)
        wit = state.witnesses.get(inv(w))
        if wit is not None and all(f.descriptor in desc and desc[f.descriptor].hash == f.system
                                   for f in wit.factors):
            return tuple(f.inverse() for f in reversed(wit.factors))
        return None

    whole = single(g)
    if whole is not None:
        return whole
    out: list[CycFactor] = []
    for code in g:
        part = single(Word((code,)))
        if part is None:
            return None
        out += part
    return tuple(out)


def refine_assgp(state: ChainState, g: Word) -> tuple:
    """Move the tail into ``D_g``: grow the alphabet, then extend unless ``g`` is covered.

    Returns the factor list for ``g`` at the new tail's top level.
    """
    grown = refine_alphabet(state.final, lett(g))
    if grown is not state.final:
        names = ",".join(state.registry[i].name for i in sorted(lett(g) - state.tail.alphabet))
        state.push(grown, f"alphabet +{names}")
    found = cover(state, state.tail.index, g)
    if found is not None:
        return found
    wit = assgp_extend(state.final, g, state.registry, stage=len(state.stages))
    cfg = state.config
    rep = verify_assgp(wit, cfg.verify_samples, cfg.seed + len(state.stages), cfg.max_exponent)
    rep.name = f"assgp extension for {state.registry.format(g)}"
    state.reports.append(rep)
    state.witnesses[g] = wit
    state.push(wit.system, f"assgp {state.registry.format(g)} k={wit.k}")
    found = cover(state, state.tail.index, g)
    if found is None:
        raise AssertionError("a fresh witness must cover its own word")
    return found


# -- building --------------------------------------------------------------------------

def build_chain(schedule: Schedule | Sequence[Task], registry: AlphabetRegistry | None = None,
                seed_system_: NbhdSystem | None = None, config: ChainConfig | None = None) -> ChainState:
    """Process tasks in order, meeting each dense set by an existing stage or a refinement."""
    registry = registry or AlphabetRegistry()
    if not isinstance(schedule, Schedule):
        schedule = Schedule(tuple(schedule))
    seed_ids = [g.id for g in registry.seed(schedule.seed_letters)]
    if seed_system_ is None:
        seed_system_ = seed_system(seed_ids, schedule.seed_depth)
    state = ChainState(registry, seed_system_, config)
    for task in schedule.tasks:
        run_task(state, task)
    return state


def _check_registered(state: ChainState, letters: Iterable[int]) -> None:
    for i in letters:
        if i not in state.registry:
            raise ValueError(f"task references unregistered generator id {i}")


def run_task(state: ChainState, task: Task) -> TaskRecord:
    if isinstance(task, DepthTask):
        if task.n < 0:
            raise ValueError("depth must be non-negative")
        if state.tail.depth >= task.n:
            return state.record(task, state.tail.index, "met")
        state.push(refine_depth(state.final, task.n), f"pad to {task.n}")
        return state.record(task, state.tail.index, "refined")

    if isinstance(task, AlphabetTask):
        _check_registered(state, task.letters)
        if task.letters <= state.tail.alphabet:
            return state.record(task, state.tail.index, "met")
        names = ",".join(state.registry[i].name for i in sorted(task.letters - state.tail.alphabet))
        state.push(refine_alphabet(state.final, task.letters), f"alphabet +{names}")
        return state.record(task, state.tail.index, "refined")

    if isinstance(task, SepTask):
        g = task.g
        _check_registered(state, lett(g))
        if not g:
            raise ValueError("SepTask needs g != e")
        for cond in reversed(state.stages):
            if lett(g) <= cond.alphabet:
                v = member_decide(cond.system, cond.depth, g)
                if isinstance(v, NotInProven):
                    return state.record(task, cond.index, "met", proof=v.proof)
        grown = refine_alphabet(state.final, lett(g))
        if grown is not state.final:
            names = ",".join(state.registry[i].name for i in sorted(lett(g) - state.tail.alphabet))
            state.push(grown, f"alphabet +{names}")
            v = member_decide(state.final, state.tail.depth, g)
            if isinstance(v, NotInProven):
                return state.record(task, state.tail.index, "refined", proof=v.proof)
        state.push(pad_extend(state.final, state.tail.depth + 1), f"pad to {state.tail.depth + 1}")
        v = member_decide(state.final, state.tail.depth, g)
        assert isinstance(v, NotInProven)
        return state.record(task, state.tail.index, "refined", proof=v.proof)

    if isinstance(task, AssgpTask):
        g = task.g
        _check_registered(state, lett(g))
        for cond in reversed(state.stages):
            if task.n <= cond.depth:
                found = cover(state, cond.index, g)
                if found is not None:
                    return state.record(task, cond.index, "met", factors=found)
        if state.tail.depth < task.n:
            state.push(refine_depth(state.final, task.n), f"pad to {task.n}")
        found = refine_assgp(state, g)
        return state.record(task, state.tail.index, "refined", factors=found)

    raise TypeError(f"unknown task {task!r}")


# -- the topology oracle -----------------------------------------------------------------

@dataclass(frozen=True)
class SeparationWitness:
    g: Word
    stage: int
    level: int
    proof: ExclusionProof


@dataclass
class AssgpCertificate:
    g: Word
    n: int
    stage: int
    factors: tuple
    spot: int
    certificates: dict  # (factor index, q) -> tree at level n of the final stage

    def product(self) -> Word:
        return product(f.word for f in self.factors)


class TopologyOracle:
    """Queries against ``U_n``, the union of level ``n`` over all stages deep enough."""

    def __init__(self, state: ChainState, budget: SearchBudget | None = None):
        self.state = state
        self.budget = budget or state.config.budget
        self._power_cache: dict = {}

    @property
    def final(self) -> NbhdSystem:
        return self.state.final

    def u_member(self, g: Word, n: int) -> Verdict:
        if n < 0:
            raise ValueError("n must be non-negative")
        g = Word(g)
        for cond in reversed(self.state.stages):
            if lett(g) <= cond.alphabet and n <= cond.depth:
                v = member_decide(cond.system, n, g, self.budget)
                if isinstance(v, InWithCert):
                    return InWithCert(v.tree, cond.index)
                if isinstance(v, NotInProven):
                    return NotInProven(v.proof, cond.index)
                return Unknown(v.spent, cond.index, v.reason)
        return Unknown(0, None, "no stage covers the letters and the level")

    def separation_witness(self, g: Word) -> SeparationWitness | None:
        g = Word(g)
        if not g:
            raise ValueError("the identity is never separated")
        rec = self.state.by_task.get(SepTask(g))
        if rec is None or rec.proof is None:
            return None
        cond = self.state.stages[rec.stage]
        return SeparationWitness(g, rec.stage, cond.depth, rec.proof)

    def replay_separation(self, wit: SeparationWitness) -> None:
        if not wit.g:
            raise CertificateError("separation witness for the identity")
        cond = self.state.stages[wit.stage]
        check_exclusion(cond.system, wit.level, wit.g, wit.proof)

    def lift_to_final(self, tree: Tree, system: NbhdSystem) -> Tree:
        return lift(tree, system, self.final)

    def factor_power(self, f: CycFactor, q: int, n: int) -> Tree:
        """Certificate at level ``n`` of the final stage for ``f^q``."""
        key = (f, q, n)
        if key in self._power_cache:
            return self._power_cache[key]
        if not f.word:
            t = identity_certificate(self.final, n)
        else:
            owner = next(s for s in self.final.ancestors() if s.hash == f.system)
            e = f.sign * q
            leaf = CyclicPower(owner.depth, f.descriptor, e, power(f.descriptor, e))
            t = lower(self.final, self.lift_to_final(leaf, owner), n)
        check_certificate(self.final, t, n)
        if t.word != power(f.word, q):
            raise CertificateError("power certificate certifies the wrong word")
        self._power_cache[key] = t
        return t

    def assgp_certificate(self, g: Word, n: int, spot: int = 10) -> AssgpCertificate | None:
        g = Word(g)
        rec = self.state.by_task.get(AssgpTask(g, n))
        if rec is None:
            return None
        certs = {}
        for idx, f in enumerate(rec.factors):
            for q in range(-spot, spot + 1):
                certs[(idx, q)] = self.factor_power(f, q, n)
        return AssgpCertificate(g, n, rec.stage, rec.factors, spot, certs)

    def conjugation_level(self, g: Word, n: int) -> int:
        return n + len(g)

    def conjugate_by(self, g: Word, tree: Tree) -> Tree:
        """Certificate for ``g h g^-1`` at level ``tree.level - len(g)``, letter by letter."""
        t = tree
        for code in reversed(g):
            t = conjugate_certificate(self.final, Word((code,)), t)
        return t


# -- invariant suites ------------------------------------------------------------------------

def run_suites(state: ChainState, samples: int = 100, seed: int = 0, words: Iterable[Word] = (),
               assgp_levels: Iterable[int] | None = None, spot: int = 10,
               separations: Iterable[Word] | None = None,
               assgp_pairs: Iterable[tuple] | None = None) -> Report:
    """Invariant suites over the final stage and the processed tasks.

    ``words`` feed the conjugation suite.  Separation witnesses are checked for
    ``separations`` (default: every nontrivial word) and ASSGP certificates for
    ``assgp_pairs`` (default: every word at every level in ``assgp_levels``).
    """
    oracle = TopologyOracle(state)
    final = state.final
    n_max = final.depth
    cfg = state.config
    rng = random.Random(seed)
    rep = Report("chain suites")

    bad = [f"stage {r.name}" for r in state.reports if not r.ok and "<=" in r.name]
    rep.tally("chain linearity (adjacent leq)", sum(1 for r in state.reports if "<=" in r.name), bad)

    bad = []
    for n in range(n_max + 1):
        if not isinstance(oracle.u_member(E, n), InWithCert):
            bad.append(f"n={n}")
    rep.tally("identity in every U_n", n_max + 1, bad)

    def sample(level: int) -> Tree:
        return sample_tree(final, level, rng, cfg.max_exponent)

    bad = []
    for _ in range(samples):
        n = rng.randrange(n_max + 1)
        t = sample(n)
        try:
            if check_certificate(final, invert_tree(t), n) != inv(t.word):
                bad.append("inverse certificate word mismatch")
        except CertificateError as exc:
            bad.append(str(exc))
    rep.tally("symmetry U_n^-1 = U_n", samples, bad)

    checked, bad = 0, []
    if n_max > 0:
        for _ in range(samples):
            n = rng.randrange(n_max)
            t1, t2 = sample(n + 1), sample(n + 1)
            checked += 1
            try:
                t = product_certificate(final, t1, t2)
                if check_certificate(final, t, n) != mul(t1.word, t2.word):
                    bad.append("product certificate word mismatch")
            except CertificateError as exc:
                bad.append(str(exc))
    rep.tally("product nesting U_{n+1}U_{n+1} ⊆ U_n", checked, bad)

    checked, bad = 0, []
    letters = [x for x in final.conjugators if x]
    if n_max > 0:
        for _ in range(samples):
            n = rng.randrange(n_max)
            t = sample(n + 1)
            y = rng.choice(letters)
            checked += 1
            try:
                c = conjugate_certificate(final, y, t)
                if check_certificate(final, c, n) != mul(mul(y, t.word), inv(y)):
                    bad.append("conjugate certificate word mismatch")
            except CertificateError as exc:
                bad.append(str(exc))
    rep.tally("letter conjugation y U_{n+1} y^-1 ⊆ U_n", checked, bad)

    checked, bad = 0, []
    for _ in range(samples):
        m = rng.randrange(n_max + 1)
        n = rng.randrange(m + 1)
        t = sample(m)
        checked += 1
        try:
            if check_certificate(final, lower(final, t, n), n) != t.word:
                bad.append("lowered certificate word mismatch")
        except CertificateError as exc:
            bad.append(str(exc))
    rep.tally("monotonicity U_m ⊆ U_n", checked, bad)

    words = [Word(w) for w in words]
    checked, bad = 0, []
    conj_words = [w for w in words if w and len(w) <= n_max] or [Word((sorted(final.alphabet)[0] + 1,))]
    for _ in range(samples if n_max > 0 else 0):
        g = rng.choice(conj_words)
        if len(g) > n_max:
            continue
        n = rng.randrange(n_max - len(g) + 1)
        k = oracle.conjugation_level(g, n)
        t = sample(k)
        checked += 1
        try:
            c = oracle.conjugate_by(g, t)
            if check_certificate(final, c, n) != mul(mul(g, t.word), inv(g)):
                bad.append("conjugation certificate word mismatch")
        except CertificateError as exc:
            bad.append(str(exc))
    rep.tally("conjugation g U_{n+len g} g^-1 ⊆ U_n", checked, bad)

    if separations is None:
        separations = [g for g in words if g]
    checked, bad = 0, []
    for g in separations:
        checked += 1
        wit = oracle.separation_witness(Word(g))
        if wit is None:
            bad.append(f"{state.registry.format(g)}: no separation witness")
            continue
        try:
            oracle.replay_separation(wit)
        except CertificateError as exc:
            bad.append(f"{state.registry.format(g)}: {exc}")
    rep.tally("separation witnesses replay", checked, bad)

    if assgp_pairs is None:
        levels = list(assgp_levels) if assgp_levels is not None else []
        assgp_pairs = [(g, n) for g in words for n in levels]
    checked, bad = 0, []
    for g, n in assgp_pairs:
        g = Word(g)
        checked += 1
        try:
            cert = oracle.assgp_certificate(g, n, spot)
        except CertificateError as exc:
            bad.append(f"{state.registry.format(g)}, n={n}: {exc}")
            continue
        if cert is None:
            bad.append(f"{state.registry.format(g)}, n={n}: no certificate")
        elif cert.product() != g:
            bad.append(f"{state.registry.format(g)}, n={n}: factors do not fold to g")
    rep.tally("ASSGP certificates fold and certify", checked, bad)
    rep.stats["power_checks"] = len(oracle._power_cache)
    return rep
