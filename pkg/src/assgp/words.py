"""Exact arithmetic in free groups.

A word is stored as a tuple of signed integers: letter ``+(id + 1)`` stands for
the generator with that id, ``-(id + 1)`` for its inverse.  Every ``Word``
instance is assumed reduced; use :func:`reduce_word` to normalise raw input.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import chain
from typing import Callable, Iterable, Iterator, Mapping


class WordError(ValueError):
    """Raised for malformed words, unknown generators and parse failures."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


def letter(gen_id: int, sign: int = 1) -> int:
    return (gen_id + 1) if sign > 0 else -(gen_id + 1)


def gen_of(code: int) -> int:
    """Generator id of a signed letter code."""
    return abs(code) - 1


class Word(tuple):
    """An immutable reduced word.  ``u * v`` is the group product."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        return super().__new__(cls, letters)

    def __mul__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        return NotImplemented

    def __pow__(self, q: int) -> "Word":
        return power(self, q)

    def __invert__(self) -> "Word":
        return inv(self)

    def inverse(self) -> "Word":
        return inv(self)

    def lett(self) -> frozenset[int]:
        return lett(self)

    @property
    def is_identity(self) -> bool:
        return len(self) == 0

    def __repr__(self) -> str:
        return f"Word({list(self)})"


E = Word()


def is_reduced(letters: Iterable[int]) -> bool:
    prev = 0
    for code in letters:
        if code == 0 or code == -prev:
            return False
        prev = code
    return True


def reduce_word(raw: Iterable[int], registry: "AlphabetRegistry | None" = None) -> Word:
    """Free reduction by a single stack pass."""
    stack: list[int] = []
    for code in raw:
        if not isinstance(code, int) or code == 0:
            raise WordError(f"invalid letter code {code!r}")
        if registry is not None and gen_of(code) not in registry:
            raise WordError(f"unregistered generator id {gen_of(code)}")
        if stack and stack[-1] == -code:
            stack.pop()
        else:
            stack.append(code)
    return Word(stack)


def concat(*words: Iterable[int]) -> tuple[int, ...]:
    """Plain concatenation, no reduction."""
    return tuple(chain.from_iterable(words))


def inv(w: Word) -> Word:
    return Word(-c for c in reversed(w))


def cancellation_length(v: Word, w: Word) -> int:
    n = min(len(v), len(w))
    c = 0
    lv = len(v)
    while c < n and v[lv - 1 - c] == -w[c]:
        c += 1
    return c


def mul(v: Word, w: Word) -> Word:
    if not v:
        return w if isinstance(w, Word) else Word(w)
    if not w:
        return v if isinstance(v, Word) else Word(v)
    c = cancellation_length(v, w)
    return Word(v[: len(v) - c] + w[c:])


def product(words: Iterable[Word]) -> Word:
    """Ordered product of many words in one stack pass."""
    return reduce_word(chain.from_iterable(words))


def conjugate(x: Word, w: Word) -> Word:
    """``x * w * x^-1``."""
    return mul(mul(x, w), inv(x))


@dataclass(frozen=True)
class CancellationSplit:
    v_prefix: Word
    v_suffix: Word
    w_prefix: Word
    w_suffix: Word

    def result(self) -> Word:
        return Word(self.v_prefix + self.w_suffix)


def split_cancellation(v: Word, w: Word) -> CancellationSplit:
    """The unique maximal-cancellation split ``v = v' v''``, ``w = w' w''``."""
    c = cancellation_length(v, w)
    cut = len(v) - c
    return CancellationSplit(Word(v[:cut]), Word(v[cut:]), Word(w[:c]), Word(w[c:]))


def lett(w: Iterable[int]) -> frozenset[int]:
    """Generator ids occurring in ``w``, signs ignored."""
    return frozenset(abs(c) - 1 for c in w)


@dataclass(frozen=True)
class CyclicRoot:
    conjugator: Word
    core: Word

    def power(self, q: int) -> Word:
        if q == 0:
            return E
        d = self.core if q > 0 else inv(self.core)
        return Word(self.conjugator + tuple.__mul__(d, abs(q)) + inv(self.conjugator))


def cyclic_root(c: Word) -> CyclicRoot:
    """Write ``c = u d u^-1`` with ``d`` cyclically reduced."""
    if not c:
        raise WordError("the identity has no cyclic root")
    n = len(c)
    i = 0
    while n - 2 * i >= 2 and c[i] == -c[n - 1 - i]:
        i += 1
    return CyclicRoot(Word(c[:i]), Word(c[i : n - i]))


def power(w: Word, q: int) -> Word:
    if q == 0 or not w:
        return E
    if q == 1:
        return w
    return cyclic_root(w).power(q)


def cyclic_member(h: Word, c: Word) -> int | None:
    """Return ``q`` with ``h = c^q`` or ``None``; exact for every ``h``."""
    root = cyclic_root(c)
    if not h:
        return 0
    u, d = root.conjugator, root.core
    lu, ld = len(u), len(d)
    middle_len = len(h) - 2 * lu
    if middle_len <= 0 or middle_len % ld:
        return None
    if h[:lu] != u or h[len(h) - lu :] != inv(u):
        return None
    t = middle_len // ld
    middle = h[lu : len(h) - lu]
    if middle == tuple.__mul__(d, t):
        return t
    if middle == tuple.__mul__(inv(d), t):
        return -t
    return None


def hom_extend(assignment: Mapping[int, Word]) -> Callable[[Word], Word]:
    """Extend a generator assignment to a homomorphism of free groups."""

    def apply(w: Word) -> Word:
        pieces = []
        for code in w:
            g = gen_of(code)
            try:
                image = assignment[g]
            except KeyError:
                raise WordError(f"generator id {g} has no assigned image") from None
            pieces.append(image if code > 0 else inv(image))
        return product(pieces)

    return apply


def retract(alphabet: Iterable[int], w: Word) -> Word:
    """Image of ``w`` under the retraction fixing ``alphabet`` and killing the rest."""
    keep = alphabet if isinstance(alphabet, (set, frozenset)) else frozenset(alphabet)
    return reduce_word(c for c in w if abs(c) - 1 in keep)


def retraction(alphabet: Iterable[int]) -> Callable[[Word], Word]:
    keep = frozenset(alphabet)
    return lambda w: retract(keep, w)


def words_of_length(alphabet: Iterable[int], length: int) -> Iterator[Word]:
    """Reduced words of exactly ``length`` letters, in length-lex order.

    Letters are ordered ``x0, x0^-1, x1, x1^-1, ...``.
    """
    codes = []
    for g in sorted(alphabet):
        codes += [letter(g, 1), letter(g, -1)]

    def rec(prefix: list[int]) -> Iterator[Word]:
        if len(prefix) == length:
            yield Word(prefix)
            return
        for code in codes:
            if prefix and prefix[-1] == -code:
                continue
            prefix.append(code)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


def words_up_to(alphabet: Iterable[int], max_length: int) -> Iterator[Word]:
    alphabet = tuple(alphabet)
    for n in range(max_length + 1):
        yield from words_of_length(alphabet, n)


def random_word(rng, alphabet: tuple[int, ...], length: int) -> Word:
    """Uniformly random reduced word of exactly ``length`` letters."""
    out: list[int] = []
    while len(out) < length:
        code = letter(rng.choice(alphabet), rng.choice((1, -1)))
        if out and out[-1] == -code:
            continue
        out.append(code)
    return Word(out)


# -- alphabet registry -------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    id: int
    name: str
    stage: int = 0


_TOKEN = re.compile(r"\S+")
_LETTER = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?$")
_SEED_NAME = re.compile(r"^x(\d+)$")


class AlphabetRegistry:
    """Generators with unique ids and names.

    Seed letters are ``x0, x1, ...`` with ids ``0, 1, ...``; letters introduced
    at chain stage ``t`` are named ``a{t}_0, a{t}_1, ...``.
    """

    def __init__(self, generators: Iterable[Generator] = ()):
        self._by_id: dict[int, Generator] = {}
        self._by_name: dict[str, Generator] = {}
        for gen in generators:
            self._add(gen)

    def _add(self, gen: Generator) -> Generator:
        if gen.id in self._by_id:
            raise WordError(f"duplicate generator id {gen.id}")
        if gen.name in self._by_name:
            raise WordError(f"duplicate generator name {gen.name!r}")
        if not _LETTER.match(gen.name) or gen.name == "e" or "^" in gen.name:
            raise WordError(f"invalid generator name {gen.name!r}")
        self._by_id[gen.id] = gen
        self._by_name[gen.name] = gen
        return gen

    def __contains__(self, gen_id: int) -> bool:
        return gen_id in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Generator]:
        return iter(sorted(self._by_id.values(), key=lambda g: g.id))

    def __getitem__(self, gen_id: int) -> Generator:
        return self._by_id[gen_id]

    def next_id(self) -> int:
        return max(self._by_id, default=-1) + 1

    def register(self, name: str, stage: int = 0) -> Generator:
        return self._add(Generator(self.next_id(), name, stage))

    def seed(self, count: int) -> list[Generator]:
        """Ensure seed letters ``x0 .. x{count-1}`` exist; return them."""
        return [self.ensure_name(f"x{i}") for i in range(count)]

    def fresh(self, count: int, stage: int) -> list[Generator]:
        start = sum(1 for g in self._by_id.values() if g.name.startswith(f"a{stage}_"))
        return [self.register(f"a{stage}_{start + i}", stage) for i in range(count)]

    def max_stage(self) -> int:
        return max((g.stage for g in self._by_id.values()), default=0)

    def ensure_id(self, gen_id: int) -> Generator:
        if gen_id in self._by_id:
            return self._by_id[gen_id]
        for i in range(gen_id + 1):
            if i not in self._by_id:
                self._add(Generator(i, f"x{i}", 0))
        return self._by_id[gen_id]

    def ensure_name(self, name: str) -> Generator:
        if name in self._by_name:
            return self._by_name[name]
        m = _SEED_NAME.match(name)
        if m and int(m.group(1)) not in self._by_id:
            return self.ensure_id(int(m.group(1)))
        return self.register(name)

    def by_name(self, name: str) -> Generator:
        return self._by_name[name]

    def ids(self) -> frozenset[int]:
        return frozenset(self._by_id)

    # text form

    def format(self, w: Iterable[int]) -> str:
        w = tuple(w)
        if not w:
            return "e"
        parts = []
        for code in w:
            name = self._by_id[gen_of(code)].name if gen_of(code) in self._by_id else f"g{gen_of(code)}"
            parts.append(name if code > 0 else f"{name}^-1")
        return " ".join(parts)

    def parse(self, text: str, register: bool = True) -> Word:
        """Parse whitespace-separated tokens like ``x0 x1^-1 a3_2^2``."""
        raw: list[int] = []
        for m in _TOKEN.finditer(text):
            token = m.group(0)
            if token == "e":
                continue
            lm = _LETTER.match(token)
            if not lm:
                raise WordError(f"cannot parse token {token!r}", m.start())
            name, exp = lm.group(1), int(lm.group(2) or 1)
            if name not in self._by_name:
                if not register:
                    raise WordError(f"unknown generator {name!r}", m.start())
                self.ensure_name(name)
            code = letter(self._by_name[name].id, 1 if exp > 0 else -1)
            raw.extend([code] * abs(exp))
        return reduce_word(raw)

    def manifest(self) -> list[dict]:
        return [{"id": g.id, "name": g.name, "stage": g.stage} for g in self]

    @classmethod
    def from_manifest(cls, entries: Iterable[Mapping]) -> "AlphabetRegistry":
        return cls(Generator(int(e["id"]), str(e["name"]), int(e.get("stage", 0))) for e in entries)


def word_to_json(w: Word) -> dict:
    return {"letters": list(w)}


def word_from_json(obj, registry: AlphabetRegistry | None = None) -> Word:
    if isinstance(obj, Mapping):
        obj = obj.get("letters")
    if not isinstance(obj, list):
        raise WordError("word JSON must be {\"letters\": [signed integers]}")
    return reduce_word(obj, registry)
