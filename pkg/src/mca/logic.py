"""Modal formulas over cellular automata and their model checker.

Text syntax::

    #3            the current cell holds state 3
    !p  p & q  p | q  p -> q       (precedence ! > U > & > | > ->, -> is right-assoc)
    <p.q> p       p holds at the cell reached by the word p.q
    O p           p holds after one global step
    F p  G p  p U q                exact, evaluated on the trajectory lasso
    F[t] p  G[t] p  p U[t] q       bounded to horizons 0..t
    true  false

``p U q`` holds when ``p`` holds at steps 0..n and ``q`` at step n+1 for
some n. Unbounded operators are exact: the configuration space is finite,
so every trajectory is a lasso and scanning its distinct configurations
decides them.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Sequence

from .automaton import CellularAutomaton, _step_tuple, is_orbit_invariant
from .common import (
    AtomOutOfRange,
    Exhaustive,
    Mode,
    NotOrbitInvariant,
    ParseError,
    Verdict,
    iter_configurations,
)
from .monoid import EMPTY, MonoidPresentation, Word, parse_word

IMPL, OR, AND, UNTIL, UNARY, ATOM = range(6)


class Formula:
    prec = UNARY

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class Atom(Formula):
    state: int
    prec = ATOM


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    @property
    def prec(self):
        if len(self.args) == 1:
            return self.args[0].prec
        return AND if self.args else ATOM


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    @property
    def prec(self):
        if len(self.args) == 1:
            return self.args[0].prec
        return OR if self.args else ATOM


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula
    prec = IMPL


@dataclass(frozen=True)
class Space(Formula):
    word: Word
    arg: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class FBounded(Formula):
    t: int
    arg: Formula


@dataclass(frozen=True)
class GBounded(Formula):
    t: int
    arg: Formula


@dataclass(frozen=True)
class UBounded(Formula):
    t: int
    left: Formula
    right: Formula
    prec = UNTIL


@dataclass(frozen=True)
class F(Formula):
    arg: Formula


@dataclass(frozen=True)
class G(Formula):
    arg: Formula


@dataclass(frozen=True)
class U(Formula):
    left: Formula
    right: Formula
    prec = UNTIL


TRUE = And(())
FALSE = Or(())


def conj(*args: Formula) -> Formula:
    return And(tuple(args))


def disj(*args: Formula) -> Formula:
    return Or(tuple(args))


def has_unbounded(phi: Formula) -> bool:
    if isinstance(phi, (F, G, U)):
        return True
    return any(has_unbounded(c) for c in _children(phi))


def _children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, (And, Or)):
        return phi.args
    if isinstance(phi, (Implies, U, UBounded)):
        return (phi.left, phi.right)
    if isinstance(phi, Atom):
        return ()
    return (phi.arg,)


def atoms(phi: Formula) -> set[int]:
    if isinstance(phi, Atom):
        return {phi.state}
    out: set[int] = set()
    for c in _children(phi):
        out |= atoms(c)
    return out


# -- text syntax -------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(#\d+)|(->|[!&|()])|(<[^>]*>)|([OFGU])(\[\d+\])?(?![A-Za-z0-9_])|(true|false)(?![A-Za-z0-9_]))")


def _tokenize(text: str):
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input {text[pos:pos + 10]!r}", position=pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("atom", int(m.group(1)[1:]), start))
        elif m.group(2):
            out.append(("op", m.group(2), start))
        elif m.group(3):
            out.append(("word", m.group(3)[1:-1], start))
        elif m.group(4):
            bound = m.group(5)
            out.append(("temporal", (m.group(4), int(bound[1:-1]) if bound else None), start))
        else:
            out.append(("const", m.group(6), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str, pres: MonoidPresentation):
        self.toks = _tokenize(text)
        self.i = 0
        self.pres = pres

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def is_op(self, v):
        kind, val, _ = self.peek()
        return kind == "op" and val == v

    def impl(self) -> Formula:
        left = self.or_()
        if self.is_op("->"):
            self.take()
            return Implies(left, self.impl())
        return left

    def or_(self):
        args = [self.and_()]
        while self.is_op("|"):
            self.take()
            args.append(self.and_())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def and_(self):
        args = [self.until()]
        while self.is_op("&"):
            self.take()
            args.append(self.until())
        return args[0] if len(args) == 1 else And(tuple(args))

    def until(self):
        left = self.unary()
        kind, val, _ = self.peek()
        if kind == "temporal" and val[0] == "U":
            self.take()
            right = self.until()
            return U(left, right) if val[1] is None else UBounded(val[1], left, right)
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "word":
            self.take()
            return Space(parse_word(val, self.pres), self.unary())
        if kind == "temporal" and val[0] != "U":
            self.take()
            op, t = val
            arg = self.unary()
            if op == "O":
                if t is not None:
                    raise ParseError("O takes no bound", position=pos)
                return Next(arg)
            if op == "F":
                return F(arg) if t is None else FBounded(t, arg)
            return G(arg) if t is None else GBounded(t, arg)
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if kind == "atom":
            return Atom(val)
        if kind == "const":
            return TRUE if val == "true" else FALSE
        if kind == "op" and val == "(":
            inner = self.impl()
            kind2, val2, pos2 = self.take()
            if (kind2, val2) != ("op", ")"):
                raise ParseError("expected ')'", position=pos2)
            return inner
        raise ParseError(f"unexpected token {val!r}", position=pos)


def parse_formula(text: str, pres: MonoidPresentation) -> Formula:
    p = _Parser(text, pres)
    phi = p.impl()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", position=pos)
    return phi


def serialize(phi: Formula) -> str:
    def wrap(child: Formula, min_prec: int) -> str:
        s = serialize(child)
        return f"({s})" if child.prec < min_prec else s

    if isinstance(phi, Atom):
        return f"#{phi.state}"
    if isinstance(phi, (And, Or)):
        if not phi.args:
            return "true" if isinstance(phi, And) else "false"
        if len(phi.args) == 1:
            # a one-element conjunction has no syntax of its own
            return serialize(phi.args[0])
        sep = " & " if isinstance(phi, And) else " | "
        return sep.join(wrap(a, phi.prec + 1) for a in phi.args)
    if isinstance(phi, Implies):
        return f"{wrap(phi.left, IMPL + 1)} -> {wrap(phi.right, IMPL)}"
    if isinstance(phi, U):
        return f"{wrap(phi.left, UNTIL + 1)} U {wrap(phi.right, UNTIL)}"
    if isinstance(phi, UBounded):
        return f"{wrap(phi.left, UNTIL + 1)} U[{phi.t}] {wrap(phi.right, UNTIL)}"
    if isinstance(phi, Not):
        return "!" + wrap(phi.arg, UNARY)
    if isinstance(phi, Space):
        return f"<{phi.word}> " + wrap(phi.arg, UNARY)
    prefix = {Next: "O", F: "F", G: "G"}.get(type(phi))
    if prefix:
        return f"{prefix} " + wrap(phi.arg, UNARY)
    if isinstance(phi, FBounded):
        return f"F[{phi.t}] " + wrap(phi.arg, UNARY)
    if isinstance(phi, GBounded):
        return f"G[{phi.t}] " + wrap(phi.arg, UNARY)
    raise TypeError(f"not a formula: {phi!r}")


# -- model checking ------------------------------------------------------------


class ModelChecker:
    """Forcing relation for one automaton, memoizing global steps and lassos."""

    MEMO_LIMIT = 200_000

    def __init__(self, ca: CellularAutomaton):
        self.ca = ca
        self._succ: dict[tuple, tuple] = {}
        self._lassos: dict[tuple, tuple[int, int, list]] = {}
        self._space: dict[tuple[int, Word], int] = {}

    def step(self, c: tuple) -> tuple:
        nxt = self._succ.get(c)
        if nxt is None:
            if len(self._succ) > self.MEMO_LIMIT:
                self._succ.clear()
                self._lassos.clear()
            nxt = self._succ[c] = _step_tuple(self.ca, c)
        return nxt

    def iterate(self, c: tuple, k: int) -> tuple:
        for _ in range(k):
            c = self.step(c)
        return c

    def lasso(self, c: tuple) -> tuple[int, int, list]:
        """(mu, lam, trajectory[0..mu+lam-1]) for the trajectory from ``c``."""
        got = self._lassos.get(c)
        if got is not None:
            return got
        seen: dict[tuple, int] = {}
        traj = []
        cur = c
        while cur not in seen:
            seen[cur] = len(traj)
            traj.append(cur)
            cur = self.step(cur)
        mu = seen[cur]
        out = (mu, len(traj) - mu, traj)
        self._lassos[c] = out
        return out

    def target(self, i: int, w: Word) -> int:
        key = (i, w)
        j = self._space.get(key)
        if j is None:
            j = self._space[key] = self.ca.act_index(i, w)
        return j

    def check_atoms(self, phi: Formula) -> None:
        for s in atoms(phi):
            if not 0 <= s < self.ca.state_count:
                raise AtomOutOfRange(f"atom #{s} outside 0..{self.ca.state_count - 1}")

    def holds(self, i: int, c: tuple, phi: Formula) -> bool:
        t = type(phi)
        if t is Atom:
            return c[i] == phi.state
        if t is And:
            return all(self.holds(i, c, a) for a in phi.args)
        if t is Or:
            return any(self.holds(i, c, a) for a in phi.args)
        if t is Not:
            return not self.holds(i, c, phi.arg)
        if t is Implies:
            return (not self.holds(i, c, phi.left)) or self.holds(i, c, phi.right)
        if t is Space:
            return self.holds(self.target(i, phi.word), c, phi.arg)
        if t is Next:
            return self.holds(i, self.step(c), phi.arg)
        if t is FBounded or t is GBounded:
            want_any = t is FBounded
            cur = c
            for k in range(phi.t + 1):
                if k:
                    cur = self.step(cur)
                if self.holds(i, cur, phi.arg) == want_any:
                    return want_any
            return not want_any
        if t is UBounded:
            return self._until(i, [c], phi.left, phi.right, phi.t, bounded=True)
        if t is F or t is G:
            _, _, traj = self.lasso(c)
            if t is F:
                return any(self.holds(i, d, phi.arg) for d in traj)
            return all(self.holds(i, d, phi.arg) for d in traj)
        if t is U:
            mu, lam, traj = self.lasso(c)
            return self._until(i, traj, phi.left, phi.right, mu + lam - 1, bounded=False, mu=mu)
        raise TypeError(f"not a formula: {phi!r}")

    def _until(self, i, traj, left, right, last, bounded, mu=0):
        def at(k):
            if bounded:
                while len(traj) <= k:
                    traj.append(self.step(traj[-1]))
                return traj[k]
            if k < len(traj):
                return traj[k]
            lam = len(traj) - mu
            return traj[mu + (k - mu) % lam]

        for n in range(last + 1):
            if not self.holds(i, at(n), left):
                return False
            if self.holds(i, at(n + 1), right):
                return True
        return False

    def check(self, x: str, c, phi: Formula) -> bool:
        self.check_atoms(phi)
        return self.holds(self.ca.index[x], self.ca.configuration(c), phi)


def check(ca: CellularAutomaton, x: str, c, phi: Formula) -> bool:
    return ModelChecker(ca).check(x, ca.configuration(c), phi)


def lasso(ca: CellularAutomaton, c) -> tuple[int, int]:
    mu, lam, _ = ModelChecker(ca).lasso(ca.configuration(c))
    return mu, lam


def valid(ca: CellularAutomaton, x0: str, phi: Formula, mode: Mode = Exhaustive()) -> Verdict:
    mc = ModelChecker(ca)
    mc.check_atoms(phi)
    i = ca.index[x0]
    n = 0
    for c in iter_configurations(len(ca.cells), ca.state_count, mode):
        n += 1
        if not mc.holds(i, c, phi):
            return Verdict.failed(f"not forced at {x0}", counterexample=c)
    return Verdict.passed(f"forced by all {n} configurations", checked=n)


# -- probe formulas ------------------------------------------------------------


def probe_config_formula(ca: CellularAutomaton, x: str, f) -> Formula:
    f = ca.local(f)
    if not is_orbit_invariant(ca, x, f):
        raise NotOrbitInvariant(f"{f} is not orbit-invariant at {x}")
    return And(tuple(Space(w, Atom(v)) for w, v in zip(ca.nbr_words, f)))


def probe_rule_formula(ca: CellularAutomaton, x: str, f, s: int) -> Formula:
    return Implies(probe_config_formula(ca, x, f), Next(Atom(s)))


def quiescence_formula(ca: CellularAutomaton, q: int) -> Formula:
    return Implies(And(tuple(Space(w, Atom(q)) for w in ca.nbr_words)), Next(Atom(q)))


# -- random formulas -------------------------------------------------------------

KINDS = ("atom", "not", "and", "or", "implies", "space", "next", "fbounded", "gbounded", "ubounded")


def spatial_words(ca: CellularAutomaton) -> list[Word]:
    base = list(dict.fromkeys(ca.nbr_words)) or [EMPTY]
    out = list(base)
    for u in base:
        for v in base:
            out.append(u + v)
    return list(dict.fromkeys(out))


def random_formula(seed: int, depth: int, ca: CellularAutomaton, max_t: int = 2) -> Formula:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = random.Random(seed)
    words = spatial_words(ca)
    return _random(rng, depth, ca.state_count, words, max_t)


def _random(rng: random.Random, depth: int, n_states: int, words: Sequence[Word], max_t: int) -> Formula:
    if depth == 0:
        return Atom(rng.randrange(n_states))
    kind = rng.choice(KINDS)

    def sub():
        return _random(rng, depth - 1, n_states, words, max_t)

    if kind == "atom":
        return Atom(rng.randrange(n_states))
    if kind == "not":
        return Not(sub())
    if kind in ("and", "or"):
        args = tuple(sub() for _ in range(rng.randint(2, 3)))
        return And(args) if kind == "and" else Or(args)
    if kind == "implies":
        return Implies(sub(), sub())
    if kind == "space":
        return Space(rng.choice(words), sub())
    if kind == "next":
        return Next(sub())
    t = rng.randint(0, max_t)
    if kind == "fbounded":
        return FBounded(t, sub())
    if kind == "gbounded":
        return GBounded(t, sub())
    return UBounded(t, sub(), sub())


def formula_kind(phi: Formula) -> str:
    return {
        Atom: "atom", Not: "not", And: "and", Or: "or", Implies: "implies", Space: "space",
        Next: "next", FBounded: "fbounded", GBounded: "gbounded", UBounded: "ubounded",
        F: "f", G: "g", U: "u",
    }[type(phi)]

