"""Words over generators, finite monoid presentations and bounded rewriting.

Monoid elements are represented by words. Equality of elements is only
semi-decided: relations are applied as unoriented rewrites up to a step
bound, and the length-lexicographically least word found is returned.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .common import ParseError, UnknownGenerator

EPSILON = "ε"
NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Word(tuple):
    """An immutable sequence of generator names; the empty word is the unit."""

    __slots__ = ()

    def __new__(cls, letters: Iterable[str] = ()):
        return super().__new__(cls, letters)

    def __add__(self, other):
        return Word(tuple.__add__(self, tuple(other)))

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __str__(self) -> str:
        return ".".join(self) if self else EPSILON


EMPTY = Word()


def word_concat(u: Word, v: Word) -> Word:
    return Word(tuple(u) + tuple(v))


@dataclass(frozen=True)
class MonoidPresentation:
    generators: tuple[str, ...]
    relations: tuple[tuple[Word, Word], ...] = ()
    free_hint: bool = False
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(set(gens)) != len(gens):
            raise ValueError(f"duplicate generator in {gens}")
        for g in gens:
            if not NAME_RE.match(g):
                raise ValueError(f"bad generator name {g!r}")
        rels = tuple((Word(u), Word(v)) for u, v in self.relations)
        object.__setattr__(self, "relations", rels)
        if self.free_hint and rels:
            raise ValueError("a presentation flagged free cannot carry relations")
        object.__setattr__(self, "_index", {g: i for i, g in enumerate(gens)})
        for u, v in rels:
            for g in (*u, *v):
                if g not in self._index:
                    raise UnknownGenerator(g)

    def index(self, g: str) -> int:
        try:
            return self._index[g]
        except KeyError:
            raise UnknownGenerator(g) from None

    def sort_key(self, w: Word) -> tuple[int, tuple[int, ...]]:
        """Length-lexicographic key, letters ordered by declaration."""
        return len(w), tuple(self._index[g] for g in w)


def free_monoid(*generators: str) -> MonoidPresentation:
    return MonoidPresentation(tuple(generators), (), free_hint=True)


def parse_word(text: str, pres: MonoidPresentation) -> Word:
    s = text.strip()
    if s == EPSILON:
        return EMPTY
    if not s:
        raise ParseError("empty word (write ε for the unit)", position=0)
    letters = []
    pos = 0
    for part in s.split("."):
        if not NAME_RE.match(part):
            raise ParseError(f"bad generator token {part!r}", position=pos)
        if part not in pres._index:
            raise UnknownGenerator(part)
        letters.append(part)
        pos += len(part) + 1
    return Word(letters)


def _rewrites(w: Word, rules: list[tuple[Word, Word]], max_len: int) -> Iterable[Word]:
    n = len(w)
    for lhs, rhs in rules:
        k = len(lhs)
        if n - k + len(rhs) > max_len:
            continue
        for i in range(n - k + 1):
            if w[i : i + k] == lhs:
                yield Word(w[:i] + rhs + w[i + k :])


def _least_within(pres: MonoidPresentation, w: Word, bound: int) -> Word:
    rules = []
    for u, v in pres.relations:
        rules.append((u, v))
        rules.append((v, u))
    # lengthening rewrites are allowed, but only by one relation side's worth
    max_len = len(w) + max((max(len(u), len(v)) for u, v in pres.relations), default=0)
    best = w
    seen = {w}
    frontier = deque([w])
    for _ in range(bound):
        nxt = deque()
        for cur in frontier:
            for r in _rewrites(cur, rules, max_len):
                if r not in seen:
                    seen.add(r)
                    nxt.append(r)
                    if pres.sort_key(r) < pres.sort_key(best):
                        best = r
        if not nxt:
            break
        frontier = nxt
    return best


def reduce_bounded(pres: MonoidPresentation, w: Word, bound: int) -> Word:
    """Least word (length-lex) reachable from ``w`` by at most ``bound`` rewrites.

    The search is restarted from each improvement until it stabilises, so the
    result is a fixed point and the operation is idempotent for a given bound.
    """
    if bound < 0:
        raise ValueError("bound must be >= 0")
    w = Word(w)
    if not pres.relations:
        return w
    while True:
        r = _least_within(pres, w, bound)
        if r == w:
            return w
        w = r


class IdentityVerdict(enum.Enum):
    IDENTITY = "Identity"
    NOT_IDENTITY = "NotIdentityWitness"
    UNKNOWN = "Unknown"


def words_identity_bounded(pres: MonoidPresentation, w: Word, bound: int) -> IdentityVerdict:
    # NOT_IDENTITY is never produced here: refuting needs a cell that moves,
    # which only the automaton layer can supply.
    if reduce_bounded(pres, w, bound) == EMPTY:
        return IdentityVerdict.IDENTITY
    return IdentityVerdict.UNKNOWN
