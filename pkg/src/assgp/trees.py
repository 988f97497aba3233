"""Derivation trees: certificates that a word lies in a level of a system.

Node kinds mirror how an element of an enriched level is assembled:

* ``LeafExplicit`` -- the word belongs to the level ``U_i`` the system was built
  on.  ``inner`` is the certificate in the parent system, or ``None`` when the
  level is a finite explicit set.
* ``LeafBase`` -- an explicitly listed word of the enrichment set ``B``.
* ``CyclicPower`` -- ``base ** exponent`` for a cyclic descriptor of ``B``.
* ``Conj`` -- ``x * left * right * x^-1`` with both children one level lower.

Every node stores its word; checkers recompute it from the children.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .words import Word, inv, lett, mul, power, product, reduce_word


class CertificateError(ValueError):
    """A derivation tree failed to re-verify."""


@dataclass(frozen=True, eq=True)
class LeafExplicit:
    level: int
    word: Word
    inner: "Tree | None" = None


@dataclass(frozen=True, eq=True)
class LeafBase:
    level: int
    word: Word


@dataclass(frozen=True, eq=True)
class CyclicPower:
    level: int
    base: Word
    exponent: int
    word: Word


@dataclass(frozen=True, eq=True)
class Conj:
    level: int
    conjugator: Word
    left: "Tree"
    right: "Tree"
    word: Word


Tree = Union[LeafExplicit, LeafBase, CyclicPower, Conj]


def explicit_leaf(level: int, word: Word, inner: Tree | None = None) -> LeafExplicit:
    return LeafExplicit(level, word, inner)


def cyclic_leaf(level: int, base: Word, exponent: int) -> CyclicPower:
    return CyclicPower(level, base, exponent, power(base, exponent))


def conj_node(level: int, x: Word, left: Tree, right: Tree) -> Conj:
    return Conj(level, x, left, right, conj_word(x, left.word, right.word))


def conj_word(x: Word, u: Word, v: Word) -> Word:
    return mul(mul(x, mul(u, v)), inv(x))


def invert_tree(t: Tree) -> Tree:
    """Certificate for the inverse word, mirroring the derivation."""
    if isinstance(t, LeafExplicit):
        return LeafExplicit(t.level, inv(t.word), None if t.inner is None else invert_tree(t.inner))
    if isinstance(t, LeafBase):
        return LeafBase(t.level, inv(t.word))
    if isinstance(t, CyclicPower):
        return CyclicPower(t.level, t.base, -t.exponent, inv(t.word))
    # (x u v x^-1)^-1 = x v^-1 u^-1 x^-1
    return Conj(t.level, t.conjugator, invert_tree(t.right), invert_tree(t.left), inv(t.word))


def tree_depth(t: Tree) -> int:
    if isinstance(t, Conj):
        return 1 + max(tree_depth(t.left), tree_depth(t.right))
    return 0


def iter_nodes(t: Tree) -> Iterator[Tree]:
    """Pre-order walk of this system's nodes (does not enter ``inner``)."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Conj):
            stack.append(node.right)
            stack.append(node.left)


# -- canonical representations ----------------------------------------------

@dataclass(frozen=True)
class Factor:
    word: Word
    origin: str  # "explicit" | "cyclic-power" | "conjugator-letter"
    base: Word | None = None
    exponent: int | None = None


@dataclass(frozen=True)
class FactorSequence:
    factors: tuple[Factor, ...]

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    @property
    def words(self) -> list[Word]:
        return [f.word for f in self.factors]

    def product(self) -> Word:
        return product(self.words)

    def letter_count(self) -> int:
        return sum(len(lett(f.word)) for f in self.factors)


def flatten(t: Tree) -> FactorSequence:
    """In-order factor list ``a_1, ..., a_m`` of the canonical representation."""
    out: list[Factor] = []

    def walk(node: Tree) -> None:
        if isinstance(node, (LeafExplicit, LeafBase)):
            out.append(Factor(node.word, "explicit"))
        elif isinstance(node, CyclicPower):
            out.append(Factor(node.word, "cyclic-power", node.base, node.exponent))
        elif isinstance(node, Conj):
            out.append(Factor(node.conjugator, "conjugator-letter"))
            walk(node.left)
            walk(node.right)
            out.append(Factor(inv(node.conjugator), "conjugator-letter"))
        else:
            raise CertificateError(f"malformed tree node {node!r}")

    walk(t)
    seq = FactorSequence(tuple(out))
    if seq.product() != t.word:
        raise CertificateError("factor product differs from the tree's word")
    return seq


# -- JSON ---------------------------------------------------------------------

def tree_to_json(t: Tree) -> dict:
    if isinstance(t, LeafExplicit):
        d = {"kind": "explicit", "level": t.level, "word": list(t.word)}
        if t.inner is not None:
            d["inner"] = tree_to_json(t.inner)
        return d
    if isinstance(t, LeafBase):
        return {"kind": "base", "level": t.level, "word": list(t.word)}
    if isinstance(t, CyclicPower):
        return {"kind": "cyclic", "level": t.level, "base": list(t.base), "exponent": t.exponent,
                "word": list(t.word)}
    return {"kind": "conj", "level": t.level, "conjugator": list(t.conjugator),
            "left": tree_to_json(t.left), "right": tree_to_json(t.right), "word": list(t.word)}


def tree_from_json(d: dict) -> Tree:
    try:
        kind = d["kind"]
        level = int(d["level"])
        word = reduce_word(d["word"])
        if kind == "explicit":
            inner = tree_from_json(d["inner"]) if "inner" in d else None
            return LeafExplicit(level, word, inner)
        if kind == "base":
            return LeafBase(level, word)
        if kind == "cyclic":
            return CyclicPower(level, reduce_word(d["base"]), int(d["exponent"]), word)
        if kind == "conj":
            return Conj(level, reduce_word(d["conjugator"]), tree_from_json(d["left"]),
                        tree_from_json(d["right"]), word)
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateError(f"malformed tree JSON: {exc}") from exc
    raise CertificateError(f"unknown node kind {kind!r}")
