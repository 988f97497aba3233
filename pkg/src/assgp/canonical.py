"""Canonical representations: letter counts, enumeration and sampling of levels."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator

from .systems import (
    NbhdSystem,
    eta_collapse,
    sorted_words,
    wrap,
)
from .trees import (
    LeafBase,
    LeafExplicit,
    Tree,
    conj_node,
    cyclic_leaf,
    flatten,
    invert_tree,
)
from .words import E

__all__ = [
    "letter_sum",
    "letter_budget",
    "letter_bound",
    "letter_ratio",
    "eta_collapse",
    "exponent_order",
    "enumerate_level",
    "EnumerationManifest",
    "sample_tree",
    "sample_trees",
]


def letter_sum(tree: Tree) -> int:
    return flatten(tree).letter_count()


def letter_budget(level: int, depth: int, base_size: int) -> int:
    return base_size * 4 ** (depth - level)


def letter_bound(tree: Tree, depth: int, base_size: int) -> bool:
    """Does the factor sequence use at most ``|X| * 4^(n - i)`` letters in total?"""
    return letter_sum(tree) <= letter_budget(tree.level, depth, base_size)


def letter_ratio(tree: Tree, depth: int, base_size: int) -> float:
    return letter_sum(tree) / letter_budget(tree.level, depth, base_size)


def exponent_order(bound: int) -> list[int]:
    """0, 1, -1, 2, -2, ... up to ``bound``."""
    out = [0]
    for q in range(1, bound + 1):
        out += [q, -q]
    return out


@dataclass(frozen=True)
class EnumerationManifest:
    system: str
    level: int
    depth_budget: int
    exponent_budget: int
    cap: int | None
    count: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def enumerate_level(system: NbhdSystem, level: int, depth_budget: int, exponent_budget: int,
                    cap: int | None = None) -> Iterator[tuple]:
    """Deterministic stream of ``(word, tree)`` pairs certified at ``level``.

    Order: inherited leaves (one per distinct word), explicit enrichment words,
    cyclic powers by exponent order, then conjugation nodes by conjugator, left
    child, right child.  ``cap`` limits the stream and every child list, which
    keeps deep levels of large systems tractable.
    """
    count = 0
    for t in _trees(system, level, depth_budget, exponent_budget, cap, {}):
        yield t.word, t
        count += 1
        if cap is not None and count >= cap:
            return


def _trees(system: NbhdSystem, i: int, depth: int, qmax: int, cap: int | None, memo: dict):
    key = (system.hash, i, depth)
    if key in memo:
        yield from memo[key]
        return
    out: list[Tree] = []

    def full() -> bool:
        return cap is not None and len(out) >= cap

    if system.kind == "seed":
        out = [LeafExplicit(i, w) for w in sorted_words(system.levels[i].explicit)]
    elif system.kind == "padding":
        if i > system.parent.depth:
            out = [LeafExplicit(i, E)]
        else:
            out = [wrap(system, t) for t in _trees(system.parent, i, depth, qmax, cap, memo)]
    else:
        n = system.depth
        seen = set()
        for t in _trees(system.parent, i, depth, qmax, cap, memo):
            if t.word not in seen:
                seen.add(t.word)
                out.append(wrap(system, t))
        if i == n:
            for w in sorted_words(system.levels[n].explicit):
                out.append(LeafBase(n, w))
            for c in system.levels[n].cyclic:
                for q in exponent_order(qmax):
                    out.append(cyclic_leaf(n, c, q))
        elif depth > 0:
            children = list(_trees(system, i + 1, depth - 1, qmax, cap, memo))
            for x in system.conjugators:
                for left in children:
                    for right in children:
                        if full():
                            break
                        out.append(conj_node(i, x, left, right))
    if cap is not None:
        out = out[:cap]
    memo[key] = out
    yield from out


def sample_tree(system: NbhdSystem, level: int, rng: random.Random, max_exponent: int = 8,
                conj_prob: float = 0.6, bridge_prob: float = 0.3,
                focus: tuple = ()) -> Tree:
    """A random certified tree at ``level``.

    Besides plain random shapes, a *bridge* builds ``x (a z)(z^-1 b) x^-1``
    two levels up, so that new letters in ``z`` cancel; this produces many
    certified words over the old alphabet whose derivations still pass
    through the enrichment.  Cyclic descriptors listed in ``focus`` are drawn
    for half of the bottom-level cyclic leaves.
    """
    if system.kind == "seed":
        return LeafExplicit(level, rng.choice(sorted_words(system.levels[level].explicit)))
    if system.kind == "padding":
        if level > system.parent.depth:
            return LeafExplicit(level, E)
        return wrap(system, sample_tree(system.parent, level, rng, max_exponent, conj_prob, bridge_prob, focus))
    n = system.depth
    bottom = system.levels[n]
    if level == n:
        options = ["inherited"]
        if bottom.explicit:
            options.append("base")
        if bottom.cyclic:
            options += ["cyclic", "cyclic"]
        pick = rng.choice(options)
        if pick == "base":
            return LeafBase(n, rng.choice(sorted_words(bottom.explicit)))
        if pick == "cyclic":
            favoured = [c for c in focus if c in system.bottom_cyclic]
            c = rng.choice(favoured) if favoured and rng.random() < 0.5 else rng.choice(bottom.cyclic)
            return cyclic_leaf(n, c, rng.randint(-max_exponent, max_exponent))
        return wrap(system, sample_tree(system.parent, n, rng, max_exponent, conj_prob, bridge_prob, focus))
    if rng.random() >= conj_prob:
        return wrap(system, sample_tree(system.parent, level, rng, max_exponent, conj_prob, bridge_prob, focus))
    x = rng.choice(system.conjugators)
    args = (rng, max_exponent, conj_prob, bridge_prob, focus)
    if level + 2 <= n and rng.random() < bridge_prob:
        a = sample_tree(system, level + 2, *args)
        b = sample_tree(system, level + 2, *args)
        z = sample_tree(system, level + 2, *args)
        left = conj_node(level + 1, E, a, z)
        right = conj_node(level + 1, E, invert_tree(z), b)
        return conj_node(level, x, left, right)
    left = sample_tree(system, level + 1, *args)
    right = sample_tree(system, level + 1, *args)
    return conj_node(level, x, left, right)


def sample_trees(system: NbhdSystem, level: int, count: int, seed: int = 0, **kw) -> list[Tree]:
    rng = random.Random(seed)
    return [sample_tree(system, level, rng, **kw) for _ in range(count)]
