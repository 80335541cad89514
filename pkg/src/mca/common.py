"""Shared error types, verdicts and enumeration modes."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Iterator

DEFAULT_CAP = 2_000_000


class MCAError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MCAError):
    """Malformed text; carries a character position or a line number."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif position is not None:
            where = f"position {position}: "
        super().__init__(where + message)


class UnknownGenerator(MCAError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"unknown generator {symbol!r}")


class ModulusNonPositive(MCAError):
    pass


class NotOrbitInvariant(MCAError):
    pass


class NotClosed(MCAError):
    def __init__(self, cell: str, generator: str):
        self.cell = cell
        self.generator = generator
        super().__init__(f"subset not closed: {cell}.{generator} leaves it")


class AtomOutOfRange(MCAError):
    pass


class CapExceeded(MCAError):
    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"configuration space has {size} elements, above the cap of {cap}; use sampling"
        )


class IncompatibleSignatures(MCAError):
    pass


class NotReachable(MCAError):
    pass


class LiftImpossible(MCAError):
    pass


class ValidationFailed(MCAError):
    def __init__(self, verdict: "Verdict"):
        self.verdict = verdict
        super().__init__(f"validation failed: {verdict.reason}")


@dataclass
class Verdict:
    ok: bool
    reason: str = ""
    witness: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def passed(cls, reason: str = "", **witness: Any) -> "Verdict":
        return cls(True, reason, witness)

    @classmethod
    def failed(cls, reason: str, **witness: Any) -> "Verdict":
        return cls(False, reason, witness)


@dataclass(frozen=True)
class Exhaustive:
    cap: int = DEFAULT_CAP


@dataclass(frozen=True)
class Sample:
    n: int
    seed: int


Mode = Exhaustive | Sample


def iter_configurations(n_cells: int, n_states: int, mode: Mode) -> Iterator[tuple[int, ...]]:
    """Configurations as state tuples; lexicographic for Exhaustive, seeded draws for Sample."""
    if isinstance(mode, Exhaustive):
        size = n_states**n_cells
        if size > mode.cap:
            raise CapExceeded(size, mode.cap)
        return itertools.product(range(n_states), repeat=n_cells)
    rng = random.Random(mode.seed)
    return (tuple(rng.randrange(n_states) for _ in range(n_cells)) for _ in range(mode.n))
