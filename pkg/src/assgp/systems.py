"""Finite neighbourhood systems, stored symbolically.

A system is a tower ``U_0 ⊇ U_1 ⊇ ... ⊇ U_n`` of symmetric subsets of the free
group over a finite alphabet.  Three constructions exist:

``seed``
    every level is a finite explicit set (normally ``{e}``).
``padding``
    the parent's levels, followed by extra levels equal to ``{e}``.
``enrichment``
    the parent's levels, with the bottom level enlarged by a symmetric set
    ``B`` (explicit words plus whole cyclic subgroups) and every higher level
    closed under ``x * V_{i+1} * V_{i+1} * x^-1`` for ``x`` in the symmetrised
    alphabet with identity.

Levels are never materialised.  Membership is witnessed by derivation trees
(:mod:`assgp.trees`) and refuted by replayable exclusion proofs.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .report import Report
from .trees import (
    CertificateError,
    Conj,
    CyclicPower,
    LeafBase,
    LeafExplicit,
    Tree,
    conj_node,
    conj_word,
)
from .words import E, Word, cyclic_member, inv, is_reduced, lett, power, retract


# -- ordering helpers ----------------------------------------------------------

def letter_key(code: int) -> int:
    """Order x0, x0^-1, x1, x1^-1, ..."""
    return 2 * (abs(code) - 1) + (0 if code > 0 else 1)


def word_key(w: Sequence[int]) -> tuple:
    return (len(w), tuple(letter_key(c) for c in w))


def sorted_words(ws: Iterable[Word]) -> list[Word]:
    return sorted(ws, key=word_key)


# -- data model ------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSpec:
    explicit: frozenset = frozenset()
    cyclic: tuple = ()
    recursive: bool = False
    inherited: bool = False

    def to_json(self) -> dict:
        return {
            "explicit": [list(w) for w in sorted_words(self.explicit)],
            "cyclic": [list(c) for c in self.cyclic],
            "recursive": self.recursive,
            "inherited": self.inherited,
        }


class NbhdSystem:
    """An immutable finite neighbourhood system with its construction history."""

    def __init__(self, alphabet: Iterable[int], levels: Sequence[LevelSpec], kind: str,
                 parent: "NbhdSystem | None" = None, subkind: str | None = None,
                 detail: dict | None = None, extends_parent: bool = False,
                 retraction_safe: bool = False, companion: "NbhdSystem | None" = None):
        self.alphabet = frozenset(alphabet)
        self.levels = tuple(levels)
        self.kind = kind
        self.parent = parent
        self.subkind = subkind
        self.detail = dict(detail or {})
        self.extends_parent = extends_parent
        self.retraction_safe = retraction_safe
        self.companion = companion
        self._hash: str | None = None
        self._conjugators: list[Word] | None = None
        self._cyclic_set: frozenset | None = None

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def conjugators(self) -> list[Word]:
        """The symmetrised alphabet with identity, identity first."""
        if self._conjugators is None:
            out = [E]
            for g in sorted(self.alphabet):
                out.append(Word((g + 1,)))
                out.append(Word((-(g + 1),)))
            self._conjugators = out
        return self._conjugators

    @property
    def bottom_cyclic(self) -> frozenset:
        if self._cyclic_set is None:
            cs = self.levels[-1].cyclic
            self._cyclic_set = frozenset(cs) | frozenset(inv(c) for c in cs)
        return self._cyclic_set

    def manifest(self) -> dict:
        return {
            "kind": self.kind,
            "subkind": self.subkind,
            "alphabet": sorted(self.alphabet),
            "depth": self.depth,
            "levels": [lv.to_json() for lv in self.levels],
            "parent": None if self.parent is None else self.parent.hash,
            "extends_parent": self.extends_parent,
            "retraction_safe": self.retraction_safe,
            "companion": None if self.companion is None else self.companion.hash,
            "detail": self.detail,
        }

    @property
    def hash(self) -> str:
        if self._hash is None:
            blob = json.dumps(self.manifest(), sort_keys=True, separators=(",", ":"))
            self._hash = hashlib.sha256(blob.encode()).hexdigest()
        return self._hash

    def ancestors(self) -> list["NbhdSystem"]:
        """This system followed by its parents, nearest first."""
        out, s = [], self
        while s is not None:
            out.append(s)
            s = s.parent
        return out

    def is_ancestor_of(self, other: "NbhdSystem") -> bool:
        return any(s.hash == self.hash for s in other.ancestors())

    def __repr__(self) -> str:
        tag = self.kind if self.subkind is None else f"{self.kind}/{self.subkind}"
        return f"NbhdSystem({tag}, |X|={len(self.alphabet)}, depth={self.depth}, {self.hash[:10]})"


# -- constructors ------------------------------------------------------------------

def _check_words(ws: Iterable[Word], alphabet: frozenset, what: str) -> None:
    for w in ws:
        if not is_reduced(w):
            raise ValueError(f"{what}: word {list(w)} is not reduced")
        if not lett(w) <= alphabet:
            raise ValueError(f"{what}: word {list(w)} uses letters outside the alphabet")


def seed_system(alphabet: Iterable[int], depth: int = 0,
                explicit: Sequence[Iterable[Word]] | None = None) -> NbhdSystem:
    """A system with finite explicit levels, ``{e}`` at every level by default.

    Custom ``explicit`` sets are stored verbatim (no symmetrisation) so that
    :func:`verify_system` can report violations in them.
    """
    alpha = frozenset(alphabet)
    if not alpha:
        raise ValueError("a seed system needs a nonempty alphabet")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if explicit is None:
        sets = [frozenset([E]) for _ in range(depth + 1)]
    else:
        sets = [frozenset(Word(w) for w in s) for s in explicit]
        if len(sets) != depth + 1:
            raise ValueError("need one explicit set per level")
    for s in sets:
        _check_words(s, alpha, "seed level")
    return NbhdSystem(alpha, [LevelSpec(explicit=s) for s in sets], "seed")


def closure_seed(alphabet: Iterable[int], depth: int, top: Iterable[Word]) -> NbhdSystem:
    """A seed whose bottom level is ``top ∪ top^-1 ∪ {e}`` and every higher level is
    exactly the set of conjugated products of the level below.

    Such a seed satisfies all four conditions with nontrivial finite levels.
    Level sizes grow roughly like ``|X̄| * |U_{i+1}|^2``, so keep depth small.
    """
    alpha = frozenset(alphabet)
    bottom = {E} | {Word(w) for w in top} | {inv(Word(w)) for w in top}
    conj = [E] + [Word((s * (g + 1),)) for g in sorted(alpha) for s in (1, -1)]
    sets = [frozenset(bottom)]
    for _ in range(depth):
        below = sorted_words(sets[0])
        sets.insert(0, frozenset(conj_word(x, u, v) for x in conj for u in below for v in below))
    return seed_system(alpha, depth, sets)


def pad_extend(system: NbhdSystem, m: int) -> NbhdSystem:
    if m <= system.depth:
        raise ValueError(f"padding target {m} must exceed the current depth {system.depth}")
    levels = [LevelSpec(inherited=True) for _ in range(system.depth + 1)]
    levels += [LevelSpec(explicit=frozenset([E])) for _ in range(m - system.depth)]
    return NbhdSystem(system.alphabet, levels, "padding", parent=system,
                      detail={"old_depth": system.depth}, extends_parent=True)


def enrich(system: NbhdSystem, words: Iterable[Word] = (), cyclic: Iterable[Word] = (),
           alphabet: Iterable[int] | None = None, subkind: str = "enrich",
           detail: dict | None = None, extends_parent: bool | None = None,
           companion: NbhdSystem | None = None) -> NbhdSystem:
    """The enrichment of ``system`` by explicit words and cyclic subgroups.

    Inverses of explicit words are added automatically; a cyclic generator and
    its inverse describe the same subgroup and are stored once.  The alphabet
    defaults to the old alphabet plus every letter used in the enrichment set.
    """
    words = [Word(w) for w in words]
    cyclic = [Word(c) for c in cyclic]
    alpha = frozenset(system.alphabet)
    alpha |= frozenset(alphabet) if alphabet is not None else frozenset()
    for w in words + cyclic:
        alpha |= lett(w)
    _check_words(words + cyclic, alpha, "enrichment set")

    explicit = frozenset(words) | frozenset(inv(w) for w in words)
    explicit -= {E}
    gens: list[Word] = []
    for c in cyclic:
        if c and c not in gens and inv(c) not in gens:
            gens.append(c)
    gens = tuple(gens)

    fresh = alpha - system.alphabet
    all_fresh = all(lett(w) <= fresh for w in list(explicit) + list(gens))
    n = system.depth
    levels = [LevelSpec(recursive=True, inherited=True) for _ in range(n)]
    levels.append(LevelSpec(explicit=explicit, cyclic=gens, inherited=True))
    return NbhdSystem(alpha, levels, "enrichment", parent=system, subkind=subkind,
                      detail=detail,
                      extends_parent=all_fresh if extends_parent is None else extends_parent,
                      retraction_safe=all_fresh, companion=companion)


def cyclic_enrich(system: NbhdSystem, generators: Iterable[Word],
                  alphabet: Iterable[int] | None = None) -> NbhdSystem:
    return enrich(system, cyclic=generators, alphabet=alphabet, subkind="cyclic")


# -- certificate algebra ---------------------------------------------------------

def _level_check(system: NbhdSystem, i: int) -> None:
    if not 0 <= i <= system.depth:
        raise ValueError(f"level {i} out of range 0..{system.depth}")


def identity_certificate(system: NbhdSystem, i: int) -> Tree:
    _level_check(system, i)
    if system.kind == "seed":
        return LeafExplicit(i, E)
    if system.kind == "padding" and i > system.parent.depth:
        return LeafExplicit(i, E)
    return LeafExplicit(i, E, identity_certificate(system.parent, i))


def wrap(system: NbhdSystem, inner: Tree) -> LeafExplicit:
    """Certificate in ``system`` for an element of its parent's level."""
    return LeafExplicit(inner.level, inner.word, inner)


def lift(tree: Tree, ancestor: NbhdSystem, descendant: NbhdSystem) -> Tree:
    """Carry a certificate from ``ancestor`` down the provenance chain to ``descendant``."""
    chain = descendant.ancestors()
    hashes = [s.hash for s in chain]
    if ancestor.hash not in hashes:
        raise CertificateError("lift: not an ancestor of the target system")
    steps = hashes.index(ancestor.hash)
    for _ in range(steps):
        tree = LeafExplicit(tree.level, tree.word, tree)
    return tree


def close_conj(system: NbhdSystem, i: int, x: Word, tu: Tree, tv: Tree) -> Tree:
    """Certificate for ``x u v x^-1`` at level ``i`` from certificates at ``i + 1``."""
    if tu.level != i + 1 or tv.level != i + 1:
        raise CertificateError("close_conj: children must sit one level below")
    if system.kind == "enrichment":
        return conj_node(i, x, tu, tv)
    if system.kind == "padding":
        old = system.parent.depth
        if i + 1 > old:
            if tu.word or tv.word:
                raise CertificateError("close_conj: padded levels contain only e")
            return identity_certificate(system, i)
        if not (isinstance(tu, LeafExplicit) and tu.inner is not None
                and isinstance(tv, LeafExplicit) and tv.inner is not None):
            raise CertificateError("close_conj: malformed padding certificate")
        return wrap(system, close_conj(system.parent, i, x, tu.inner, tv.inner))
    w = conj_word(x, tu.word, tv.word)
    if w not in system.levels[i].explicit:
        raise CertificateError(f"(3_U) violation: conjugated product {list(w)} missing from level {i}")
    return LeafExplicit(i, w)


def lower(system: NbhdSystem, tree: Tree, target: int) -> Tree:
    """Monotonicity ``U_{i+1} ⊆ U_i``: ``w = e * w * e * e^-1``."""
    if target > tree.level:
        raise CertificateError("lower: target level must not exceed the tree's level")
    while tree.level > target:
        tree = close_conj(system, tree.level - 1, E, tree, identity_certificate(system, tree.level))
    return tree


def conjugate_certificate(system: NbhdSystem, x: Word, tree: Tree) -> Tree:
    """``x h x^-1`` one level up, for a letter or identity ``x``."""
    return close_conj(system, tree.level - 1, x, tree, identity_certificate(system, tree.level))


def product_certificate(system: NbhdSystem, t1: Tree, t2: Tree) -> Tree:
    """``u v`` one level up from two certificates at the same level."""
    return close_conj(system, t1.level - 1, E, t1, t2)


def retract_tree(system: NbhdSystem, tree: Tree) -> Tree:
    """Map a certificate of a fresh-letter enrichment to one in the parent.

    The result certifies ``retract(X, word)``: fresh letters and fresh
    enrichment elements are sent to ``e``, conjugators outside ``X`` become
    ``e``, and the parent's own closure rule rebuilds every node.
    """
    if system.kind != "enrichment" or not system.retraction_safe:
        raise CertificateError("retract_tree needs an enrichment by fresh-letter words")
    parent = system.parent
    keep = parent.alphabet

    def go(t: Tree) -> Tree:
        if isinstance(t, LeafExplicit):
            if t.inner is None:
                raise CertificateError("retract_tree: explicit leaf without parent certificate")
            return t.inner
        if isinstance(t, (LeafBase, CyclicPower)):
            return identity_certificate(parent, t.level)
        x = t.conjugator if lett(t.conjugator) <= keep else E
        return close_conj(parent, t.level, x, go(t.left), go(t.right))

    out = go(tree)
    if out.word != retract(keep, tree.word):
        raise CertificateError("retract_tree: image differs from the retraction of the word")
    return out


def eta_collapse(tree: Tree, system: NbhdSystem) -> Tree:
    """Rewrite a certificate of an ASSGP enrichment into one of its companion.

    Every cyclic-power leaf over ``g0`` becomes an identity leaf; all other
    nodes are kept and conjugation nodes recompute their words.  The result is
    a certificate in ``system.companion``; whether its word equals the input
    word is exactly what the collapse lemma guarantees under its hypotheses,
    and callers compare the two.
    """
    if system.subkind != "assgp" or system.companion is None:
        raise CertificateError("eta_collapse needs an ASSGP enrichment with its companion")
    g0 = Word(system.detail["g0"])
    g0i = inv(g0)
    parent = system.parent

    def go(t: Tree) -> Tree:
        if isinstance(t, CyclicPower):
            if t.base in (g0, g0i):
                return LeafExplicit(t.level, E, identity_certificate(parent, t.level))
            return t
        if isinstance(t, (LeafExplicit, LeafBase)):
            return t
        return conj_node(t.level, t.conjugator, go(t.left), go(t.right))

    return go(tree)


def descend(tree: Tree, big: NbhdSystem, small: NbhdSystem) -> Tree | None:
    """Constructively carry a certificate from ``big`` back to its ancestor ``small``.

    Only meaningful when the word lies over ``small``'s alphabet.  Returns
    ``None`` when some link of the chain gives no constructive map (a
    non-extending enrichment whose certificate is not a parent leaf).
    """
    if not small.is_ancestor_of(big):
        return None
    s = big
    t = tree
    while s.hash != small.hash:
        if s.kind == "padding":
            if not isinstance(t, LeafExplicit) or t.inner is None:
                return None
            t = t.inner
        elif s.subkind == "assgp":
            collapsed = eta_collapse(t, s)
            if collapsed.word != t.word:
                return None
            t = retract_tree(s.companion, collapsed)
        elif s.retraction_safe:
            t = retract_tree(s, t)
        elif isinstance(t, LeafExplicit) and t.inner is not None:
            t = t.inner
        else:
            return None
        s = s.parent
    return t


# -- certificate checking --------------------------------------------------------

def check_certificate(system: NbhdSystem, tree: Tree, level: int | None = None) -> Word:
    """Re-verify ``tree`` against ``system``; returns the certified word."""
    if level is not None and tree.level != level:
        raise CertificateError(f"certificate is for level {tree.level}, expected {level}")
    return _check(system, tree)


def _check(system: NbhdSystem, t: Tree) -> Word:
    i = t.level
    if not 0 <= i <= system.depth:
        raise CertificateError(f"level {i} outside 0..{system.depth}")
    if system.kind == "seed":
        if not isinstance(t, LeafExplicit) or t.inner is not None:
            raise CertificateError("seed levels only admit explicit leaves")
        if t.word not in system.levels[i].explicit:
            raise CertificateError(f"explicit lookup failed at level {i}")
        return t.word
    if system.kind == "padding":
        if not isinstance(t, LeafExplicit):
            raise CertificateError("padding levels only admit explicit leaves")
        if i > system.parent.depth:
            if t.inner is not None or t.word not in system.levels[i].explicit:
                raise CertificateError(f"padded level {i} is {{e}}")
            return t.word
        return _check_inner(system, t)
    n = system.depth
    if isinstance(t, LeafExplicit):
        return _check_inner(system, t)
    if isinstance(t, LeafBase):
        if i != n or t.word not in system.levels[n].explicit:
            raise CertificateError("base leaf not in the bottom enrichment set")
        return t.word
    if isinstance(t, CyclicPower):
        if i != n or t.base not in system.bottom_cyclic:
            raise CertificateError("cyclic leaf with an unknown generator or off the bottom level")
        if power(t.base, t.exponent) != t.word:
            raise CertificateError("cyclic leaf word is not the stated power")
        return t.word
    if isinstance(t, Conj):
        if i >= n:
            raise CertificateError("conjugation node on the bottom level")
        x = t.conjugator
        if len(x) > 1 or not lett(x) <= system.alphabet:
            raise CertificateError("conjugator is not a letter, inverse letter or e")
        if t.left.level != i + 1 or t.right.level != i + 1:
            raise CertificateError("children must sit exactly one level below")
        u = _check(system, t.left)
        v = _check(system, t.right)
        if conj_word(x, u, v) != t.word:
            raise CertificateError("conjugation node word mismatch")
        return t.word
    raise CertificateError(f"unknown node {t!r}")


def _check_inner(system: NbhdSystem, t: LeafExplicit) -> Word:
    if t.inner is None:
        raise CertificateError("inherited leaf needs the parent's certificate")
    if t.inner.level != t.level:
        raise CertificateError("inherited leaf changes level")
    w = _check(system.parent, t.inner)
    if w != t.word:
        raise CertificateError("inherited leaf word mismatch")
    return w


def certificate_ok(system: NbhdSystem, tree: Tree, level: int | None = None) -> bool:
    try:
        check_certificate(system, tree, level)
        return True
    except CertificateError:
        return False


# -- verdicts and exclusion proofs -----------------------------------------------

EXCLUSION_TAGS = (
    "explicit-miss",
    "outside-alphabet",
    "padding-delegate",
    "condition-(iii)-recursion",
    "retraction-violation",
    "bottom-union-miss",
)


@dataclass(frozen=True)
class ExclusionStep:
    tag: str
    system: str
    level: int
    word: Word

    def to_json(self) -> dict:
        return {"tag": self.tag, "system": self.system, "level": self.level, "word": list(self.word)}


@dataclass(frozen=True)
class ExclusionProof:
    steps: tuple

    @property
    def tag(self) -> str:
        return self.steps[0].tag if self.steps else ""

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, d: dict) -> "ExclusionProof":
        return cls(tuple(ExclusionStep(s["tag"], s["system"], int(s["level"]), Word(s["word"]))
                         for s in d["steps"]))


@dataclass(frozen=True)
class InWithCert:
    tree: Tree
    stage: int | None = None


@dataclass(frozen=True)
class NotInProven:
    proof: ExclusionProof
    stage: int | None = None


@dataclass(frozen=True)
class Unknown:
    spent: int
    stage: int | None = None
    reason: str = "search budget exhausted"


Verdict = Union[InWithCert, NotInProven, Unknown]


def check_exclusion(system: NbhdSystem, level: int, word: Word, proof: ExclusionProof) -> None:
    """Replay an exclusion proof; raises :class:`CertificateError` if any step fails."""
    steps = list(proof.steps)
    s, i, w = system, level, word
    for k, step in enumerate(steps):
        last = k == len(steps) - 1
        if step.system != s.hash or step.level != i or step.word != w:
            raise CertificateError(f"exclusion step {k} does not match the current system/level/word")
        tag = step.tag
        if tag == "outside-alphabet":
            ok = not lett(w) <= s.alphabet
            nxt = None
        elif tag == "explicit-miss":
            explicit_level = s.kind == "seed" or (s.kind == "padding" and i > s.parent.depth)
            ok = explicit_level and w not in s.levels[i].explicit
            nxt = None
        elif tag == "padding-delegate":
            ok = s.kind == "padding" and i <= s.parent.depth
            nxt = (s.parent, i, w)
        elif tag == "condition-(iii)-recursion":
            ok = s.kind == "enrichment" and s.extends_parent and lett(w) <= s.parent.alphabet
            nxt = (s.parent, i, w)
        elif tag == "retraction-violation":
            ok = s.kind == "enrichment" and s.retraction_safe
            nxt = (s.parent, i, retract(s.parent.alphabet, w)) if ok else None
        elif tag == "bottom-union-miss":
            ok = (s.kind == "enrichment" and i == s.depth and lett(w) <= s.alphabet
                  and w not in s.levels[i].explicit
                  and all(cyclic_member(w, c) is None for c in s.levels[i].cyclic))
            nxt = (s.parent, i, w) if lett(w) <= s.parent.alphabet else None
        else:
            raise CertificateError(f"unknown exclusion tag {tag!r}")
        if not ok:
            raise CertificateError(f"exclusion step {k} ({tag}) does not apply")
        if nxt is None:
            if not last:
                raise CertificateError("exclusion proof continues past a terminal step")
            return
        if last:
            raise CertificateError("exclusion proof ends before a terminal step")
        s, i, w = nxt
    raise CertificateError("empty exclusion proof")


def exclusion_ok(system: NbhdSystem, level: int, word: Word, proof: ExclusionProof) -> bool:
    try:
        check_exclusion(system, level, word, proof)
        return True
    except CertificateError:
        return False


# -- membership decision -----------------------------------------------------------

@dataclass(frozen=True)
class SearchBudget:
    """Limits for the witness search on words carrying newly added letters.

    ``max_exponent`` bounds cyclic exponents the search will *propose*; bottom
    levels are decided exactly regardless, since cyclic membership is exact.
    ``max_depth`` bounds nested conjugation nodes (default: the level gap).
    ``all_conjugators`` widens conjugator candidates from the letters of the
    word to the whole symmetrised alphabet.
    """

    max_exponent: int = 16
    max_depth: int | None = None
    max_nodes: int = 20000
    all_conjugators: bool = False


class _Exhausted(Exception):
    pass


class _Decider:
    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.nodes = 0
        self.memo: dict = {}
        self.exact_memo: dict = {}

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _Exhausted

    # Exact decisions return ("in", tree) | ("out", steps) | ("unknown", None)
    def decide(self, s: NbhdSystem, i: int, w: Word, depth_left: int):
        key = (s.hash, i, w, depth_left)
        if key in self.memo:
            return self.memo[key]
        self.tick()
        res = self._decide(s, i, w, depth_left)
        self.memo[key] = res
        return res

    def _decide(self, s: NbhdSystem, i: int, w: Word, depth_left: int):
        if not lett(w) <= s.alphabet:
            return ("out", [ExclusionStep("outside-alphabet", s.hash, i, w)])
        if not w:
            return ("in", identity_certificate(s, i))
        if s.kind == "seed":
            if w in s.levels[i].explicit:
                return ("in", LeafExplicit(i, w))
            return ("out", [ExclusionStep("explicit-miss", s.hash, i, w)])
        if s.kind == "padding":
            if i > s.parent.depth:
                if w in s.levels[i].explicit:
                    return ("in", LeafExplicit(i, w))
                return ("out", [ExclusionStep("explicit-miss", s.hash, i, w)])
            kind, val = self.decide(s.parent, i, w, depth_left)
            if kind == "in":
                return ("in", wrap(s, val))
            if kind == "out":
                return ("out", [ExclusionStep("padding-delegate", s.hash, i, w)] + val)
            return ("unknown", None)

        parent = s.parent
        n = s.depth
        over_parent = lett(w) <= parent.alphabet
        parent_res = None
        if over_parent:
            parent_res = self.decide(parent, i, w, depth_left)
            if parent_res[0] == "in":
                return ("in", wrap(s, parent_res[1]))
            if parent_res[0] == "out" and s.extends_parent:
                return ("out", [ExclusionStep("condition-(iii)-recursion", s.hash, i, w)] + parent_res[1])

        if i == n:
            bottom = s.levels[n]
            if w in bottom.explicit:
                return ("in", LeafBase(n, w))
            for c in bottom.cyclic:
                q = cyclic_member(w, c)
                if q is not None:
                    return ("in", CyclicPower(n, c, q, w))
            step = ExclusionStep("bottom-union-miss", s.hash, i, w)
            if not over_parent:
                return ("out", [step])
            if parent_res[0] == "out":
                return ("out", [step] + parent_res[1])
            return ("unknown", None)

        if not over_parent and s.retraction_safe:
            image = retract(parent.alphabet, w)
            r = self.decide(parent, i, image, depth_left)
            if r[0] == "out":
                return ("out", [ExclusionStep("retraction-violation", s.hash, i, w)] + r[1])

        if depth_left <= 0:
            return ("unknown", None)
        tree = self.search(s, i, w, depth_left)
        if tree is not None:
            return ("in", tree)
        return ("unknown", None)

    def candidates(self, s: NbhdSystem, w: Word) -> list[Word]:
        if self.budget.all_conjugators:
            return s.conjugators
        letters = lett(w)
        return [x for x in s.conjugators if not x or (abs(x[0]) - 1) in letters]

    def search(self, s: NbhdSystem, i: int, w: Word, depth_left: int) -> Tree | None:
        """Case-2 witness search: ``w = x u v x^-1`` with ``u, v`` one level below."""
        for x in self.candidates(s, w):
            inner = conj_word(inv(x), w, E) if x else w
            splits = [(Word(inner[:k]), Word(inner[k:])) for k in range(1, len(inner))]
            splits += [(inner, E), (E, inner)]
            for u, v in splits:
                if not self.proposable(s, i + 1, u) or not self.proposable(s, i + 1, v):
                    continue
                ru = self.decide(s, i + 1, u, depth_left - 1)
                if ru[0] != "in":
                    continue
                rv = self.decide(s, i + 1, v, depth_left - 1)
                if rv[0] != "in":
                    continue
                return conj_node(i, x, ru[1], rv[1])
        return None

    def proposable(self, s: NbhdSystem, level: int, u: Word) -> bool:
        """Respect ``max_exponent`` for bottom-level cyclic proposals."""
        if level != s.depth or not u:
            return True
        for c in s.levels[level].cyclic:
            q = cyclic_member(u, c)
            if q is not None and abs(q) > self.budget.max_exponent:
                return False
        return True


def member_decide(system: NbhdSystem, level: int, w: Word,
                  budget: SearchBudget | None = None) -> Verdict:
    """Decide ``w ∈ V_level`` with a certificate, an exclusion proof, or ``Unknown``."""
    if not 0 <= level <= system.depth:
        raise ValueError(f"level {level} out of range 0..{system.depth}")
    budget = budget or SearchBudget()
    depth = system.depth - level if budget.max_depth is None else budget.max_depth
    d = _Decider(budget)
    try:
        kind, val = d.decide(system, level, Word(w), depth)
    except _Exhausted:
        return Unknown(d.nodes)
    if kind == "in":
        check_certificate(system, val, level)
        return InWithCert(val)
    if kind == "out":
        proof = ExclusionProof(tuple(val))
        check_exclusion(system, level, Word(w), proof)
        return NotInProven(proof)
    return Unknown(d.nodes, reason="bounded search found neither a certificate nor an exclusion proof")


# -- sampled verification ------------------------------------------------------------

def verify_system(system: NbhdSystem, samples: int = 200, seed: int = 0,
                  max_exponent: int = 8) -> Report:
    """Check the four defining conditions: exactly on explicit data, by sampling otherwise."""
    import random

    from .canonical import sample_tree

    rep = Report(f"verify-system {system.hash[:12]}")
    n = system.depth

    bad = []
    for i, lv in enumerate(system.levels):
        for w in list(lv.explicit) + list(lv.cyclic):
            if not lett(w) <= system.alphabet:
                bad.append(f"level {i}: {list(w)}")
    rep.tally("(1_U) words over the alphabet", sum(len(l.explicit) + len(l.cyclic) for l in system.levels), bad)

    bad = []
    for i, lv in enumerate(system.levels):
        for w in lv.explicit:
            if inv(w) not in lv.explicit:
                bad.append(f"level {i}: inverse of {list(w)} missing")
    rep.tally("(2_U) explicit sets symmetric", sum(len(l.explicit) for l in system.levels), bad)

    bad = []
    for i in range(n + 1):
        if not certificate_ok(system, identity_certificate(system, i), i):
            bad.append(f"level {i}")
    rep.tally("(4_U) identity in every level", n + 1, bad)

    if system.kind == "seed":
        bad = []
        checked = 0
        for i in range(n):
            upper = sorted_words(system.levels[i + 1].explicit)
            for x in system.conjugators:
                for u in upper:
                    for v in upper:
                        checked += 1
                        if conj_word(x, u, v) not in system.levels[i].explicit:
                            bad.append(f"level {i}: x={list(x)} u={list(u)} v={list(v)}")
        rep.tally("(3_U) exhaustive on explicit levels", checked, bad)
        return rep

    rng = random.Random(seed)
    sym_bad, closure_bad = [], []
    cache: dict[int, list[Tree]] = {}
    for k in range(samples):
        i = rng.randrange(n + 1)
        t = sample_tree(system, i, rng, max_exponent=max_exponent)
        cache.setdefault(i, []).append(t)
        try:
            check_certificate(system, t, i)
            check_certificate(system, _invert(t), i)
        except CertificateError as exc:
            sym_bad.append(str(exc))
    rep.tally("(2_U) sampled symmetry", samples, sym_bad)

    checked = 0
    if n > 0:
        for k in range(samples):
            i = rng.randrange(n)
            tu = sample_tree(system, i + 1, rng, max_exponent=max_exponent)
            tv = sample_tree(system, i + 1, rng, max_exponent=max_exponent)
            x = rng.choice(system.conjugators)
            checked += 1
            try:
                t = close_conj(system, i, x, tu, tv)
                if check_certificate(system, t, i) != conj_word(x, tu.word, tv.word):
                    closure_bad.append("word mismatch")
            except CertificateError as exc:
                closure_bad.append(str(exc))
    rep.tally("(3_U) sampled conjugated products", checked, closure_bad)
    return rep


def _invert(t: Tree) -> Tree:
    from .trees import invert_tree

    return invert_tree(t)


def is_extension(big: NbhdSystem, small: NbhdSystem, samples: int = 200, seed: int = 0,
                 max_exponent: int = 8, budget: SearchBudget | None = None) -> Report:
    """Check that ``big`` extends ``small``: alphabets, depths, and level traces."""
    import random

    from .canonical import sample_tree

    rep = Report(f"is-extension {big.hash[:12]} over {small.hash[:12]}")
    ok_i = small.alphabet <= big.alphabet
    rep.add("(i) alphabet inclusion", ok_i, 1, 0 if ok_i else 1,
            "" if ok_i else "small alphabet not contained in big alphabet")
    ok_ii = small.depth <= big.depth
    rep.add("(ii) depth inequality", ok_ii, 1, 0 if ok_ii else 1,
            "" if ok_ii else f"depth {small.depth} > {big.depth}")
    if not (ok_i and ok_ii):
        rep.add("(iii) level traces", False, 0, 0, "skipped: (i) or (ii) failed")
        return rep

    rng = random.Random(seed)
    ancestor = small.is_ancestor_of(big)
    up_bad = []
    for _ in range(samples):
        i = rng.randrange(small.depth + 1)
        t = sample_tree(small, i, rng, max_exponent=max_exponent)
        try:
            if ancestor:
                check_certificate(big, lift(t, small, big), i)
            else:
                v = member_decide(big, i, t.word, budget)
                if not isinstance(v, InWithCert):
                    up_bad.append(f"level {i}: {list(t.word)} not certified in the extension")
        except CertificateError as exc:
            up_bad.append(str(exc))
    rep.tally("(iii) U_i ⊆ V_i", samples, up_bad)

    down_bad = []
    applicable = 0
    for _ in range(samples):
        i = rng.randrange(small.depth + 1)
        t = sample_tree(big, i, rng, max_exponent=max_exponent)
        if not lett(t.word) <= small.alphabet:
            continue
        applicable += 1
        try:
            back = descend(t, big, small) if ancestor else None
            if back is not None:
                if check_certificate(small, back, i) != t.word:
                    down_bad.append("descended certificate certifies a different word")
                continue
            v = member_decide(small, i, t.word, budget)
            if not isinstance(v, InWithCert):
                down_bad.append(f"level {i}: {list(t.word)} not decided into U_i ({type(v).__name__})")
        except CertificateError as exc:
            down_bad.append(str(exc))
    rep.tally("(iii) V_i ∩ F(X) ⊆ U_i", applicable, down_bad)
    rep.stats["trace_applicable"] = applicable
    return rep


# -- manifests ---------------------------------------------------------------------

def systems_from_manifests(manifests: Sequence[dict]) -> dict[str, NbhdSystem]:
    """Rebuild systems from manifests given roots first; returns them by hash.

    Parent and companion links must point at earlier manifests.  When a
    manifest carries its ``hash`` the rebuilt content hash must match it.
    """
    built: dict[str, NbhdSystem] = {}
    for m in manifests:
        try:
            parent = None if m.get("parent") is None else built[m["parent"]]
            companion = None if m.get("companion") is None else built[m["companion"]]
            levels = [LevelSpec(explicit=frozenset(Word(w) for w in lv.get("explicit", [])),
                                cyclic=tuple(Word(c) for c in lv.get("cyclic", [])),
                                recursive=bool(lv.get("recursive", False)),
                                inherited=bool(lv.get("inherited", False)))
                      for lv in m["levels"]]
            s = NbhdSystem(m["alphabet"], levels, m["kind"], parent=parent,
                           subkind=m.get("subkind"), detail=m.get("detail"),
                           extends_parent=bool(m.get("extends_parent", False)),
                           retraction_safe=bool(m.get("retraction_safe", False)),
                           companion=companion)
        except KeyError as exc:
            raise ValueError(f"malformed system manifest: missing or dangling {exc}") from exc
        except (TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"malformed system manifest: {exc}") from exc
        if s.kind not in ("seed", "padding", "enrichment"):
            raise ValueError(f"malformed system manifest: unknown kind {s.kind!r}")
        if s.kind != "seed" and parent is None:
            raise ValueError("malformed system manifest: derived system without a parent")
        if s.kind == "padding" and s.depth <= parent.depth:
            raise ValueError("malformed system manifest: padding must add levels")
        if s.kind == "enrichment" and s.depth != parent.depth:
            raise ValueError("malformed system manifest: enrichment must keep the depth")
        for lv in levels:
            for w in list(lv.explicit) + list(lv.cyclic):
                if not is_reduced(w):
                    raise ValueError(f"malformed system manifest: unreduced word {list(w)}")
        if "hash" in m and m["hash"] != s.hash:
            raise ValueError("malformed system manifest: content hash mismatch")
        built[s.hash] = s
    return built


def system_from_manifests(manifests: Sequence[dict]) -> NbhdSystem:
    """Rebuild the last system of a bundle (roots first, target last)."""
    if not manifests:
        raise ValueError("empty system bundle")
    built = systems_from_manifests(manifests)
    last = manifests[-1]
    if "hash" in last:
        return built[last["hash"]]
    return list(built.values())[-1]


def topological_manifests(manifests: Iterable[dict]) -> list[dict]:
    """Order manifests so that parents and companions come first."""
    by_hash = {m["hash"]: m for m in manifests}
    out: list[dict] = []
    seen: set[str] = set()

    def visit(h: str | None) -> None:
        if h is None or h in seen or h not in by_hash:
            return
        seen.add(h)
        m = by_hash[h]
        visit(m.get("parent"))
        visit(m.get("companion"))
        out.append(m)

    for h in sorted(by_hash):
        visit(h)
    return out


def system_bundle(system: NbhdSystem) -> list[dict]:
    """Manifests of a system and everything it depends on, roots first."""
    order: list[NbhdSystem] = []
    seen: set[str] = set()

    def visit(s: NbhdSystem | None) -> None:
        if s is None or s.hash in seen:
            return
        visit(s.parent)
        visit(s.companion)
        seen.add(s.hash)
        order.append(s)

    visit(system)
    return [dict(s.manifest(), hash=s.hash) for s in order]
