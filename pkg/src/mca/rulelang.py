"""Expression language for per-cell local rules.

Grammar::

    expr ::= ite | or
    ite  ::= "if" or "then" or "else" or
    or   ::= and ("or" and)*
    and  ::= cmp ("and" cmp)*
    cmp  ::= add (("=="|"!="|"<"|"<=") add)?
    add  ::= mul (("+"|"-") mul)*
    mul  ::= unary (("*"|"%") unary)*
    unary ::= "not" unary | atom
    atom ::= INT | "K" | "n(" NAME ")" | "(" expr ")"

Values are integers; booleans are 0/1 and any non-zero value is truthy.
``%`` is the mathematical remainder and requires a divisor >= 1.

Local configurations are tuples of states in neighborhood order. A rule is
tabulated over all ``|S|**|N|`` of them with the first neighbor as the most
significant digit.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .common import ModulusNonPositive, ParseError, Verdict

# Precedence levels, loosest first.
ITE, OR, AND, CMP, ADD, MUL, UNARY, ATOM = range(8)

ARITH = {"+": ADD, "-": ADD, "*": MUL, "%": MUL}
COMPARE = ("==", "!=", "<=", "<")


class RuleExpr:
    prec = ATOM

    def names(self) -> frozenset[str]:
        raise NotImplementedError

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class Int(RuleExpr):
    value: int

    def names(self):
        return frozenset()


@dataclass(frozen=True)
class Param(RuleExpr):
    def names(self):
        return frozenset()


@dataclass(frozen=True)
class Ref(RuleExpr):
    name: str

    def names(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class Not(RuleExpr):
    arg: RuleExpr
    prec = UNARY

    def names(self):
        return self.arg.names()


@dataclass(frozen=True)
class BinOp(RuleExpr):
    op: str
    left: RuleExpr
    right: RuleExpr

    @property
    def prec(self):
        if self.op == "or":
            return OR
        if self.op == "and":
            return AND
        if self.op in COMPARE:
            return CMP
        return ARITH[self.op]

    def names(self):
        return self.left.names() | self.right.names()


@dataclass(frozen=True)
class Ite(RuleExpr):
    cond: RuleExpr
    then: RuleExpr
    other: RuleExpr
    prec = ITE

    def names(self):
        return self.cond.names() | self.then.names() | self.other.names()


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(==|!=|<=|<|[-+*%()]))")
_KEYWORDS = {"if", "then", "else", "and", "or", "not", "K", "n"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("int", m.group(1), start))
        elif m.group(2):
            out.append(("id", m.group(2), start))
        else:
            out.append(("op", m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, value: str) -> bool:
        kind, v, _ = self.peek()
        return kind in ("op", "id") and v == value

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind not in ("op", "id"):
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", position=pos)

    def expr(self) -> RuleExpr:
        if self.at("if"):
            self.take()
            c = self.or_()
            self.expect("then")
            a = self.or_()
            self.expect("else")
            b = self.or_()
            return Ite(c, a, b)
        return self.or_()

    def or_(self):
        e = self.and_()
        while self.at("or"):
            self.take()
            e = BinOp("or", e, self.and_())
        return e

    def and_(self):
        e = self.cmp()
        while self.at("and"):
            self.take()
            e = BinOp("and", e, self.cmp())
        return e

    def cmp(self):
        e = self.add()
        kind, v, _ = self.peek()
        if kind == "op" and v in COMPARE:
            self.take()
            e = BinOp(v, e, self.add())
        return e

    def add(self):
        e = self.mul()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            e = BinOp(op, e, self.mul())
        return e

    def mul(self):
        e = self.unary()
        while self.at("*") or self.at("%"):
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.at("not"):
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        kind, v, pos = self.take()
        if kind == "int":
            return Int(int(v))
        if kind == "id" and v == "K":
            return Param()
        if kind == "id" and v == "n":
            self.expect("(")
            k2, name, p2 = self.take()
            if k2 != "id" or name in _KEYWORDS:
                raise ParseError(f"expected neighbor name, found {name!r}", position=p2)
            self.expect(")")
            return Ref(name)
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {v or 'end of input'!r}", position=pos)


def parse_rule(text: str) -> RuleExpr:
    p = _Parser(text)
    e = p.expr()
    kind, v, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {v!r}", position=pos)
    return e


def serialize(e: RuleExpr) -> str:
    def wrap(child: RuleExpr, min_prec: int) -> str:
        s = serialize(child)
        return f"({s})" if child.prec < min_prec else s

    if isinstance(e, Int):
        return str(e.value)
    if isinstance(e, Param):
        return "K"
    if isinstance(e, Ref):
        return f"n({e.name})"
    if isinstance(e, Not):
        return "not " + wrap(e.arg, UNARY)
    if isinstance(e, Ite):
        return f"if {wrap(e.cond, OR)} then {wrap(e.then, OR)} else {wrap(e.other, OR)}"
    if isinstance(e, BinOp):
        p = e.prec
        if p == CMP:
            return f"{wrap(e.left, ADD)} {e.op} {wrap(e.right, ADD)}"
        return f"{wrap(e.left, p)} {e.op} {wrap(e.right, p + 1)}"
    raise TypeError(f"not a rule expression: {e!r}")


# -- evaluation --------------------------------------------------------------


def eval_rule(e: RuleExpr, f: Mapping[str, int], K: int) -> int:
    if isinstance(e, Int):
        return e.value
    if isinstance(e, Param):
        return K
    if isinstance(e, Ref):
        return f[e.name]
    if isinstance(e, Not):
        return int(eval_rule(e.arg, f, K) == 0)
    if isinstance(e, Ite):
        return eval_rule(e.then if eval_rule(e.cond, f, K) else e.other, f, K)
    op = e.op
    a = eval_rule(e.left, f, K)
    if op == "and":
        return int(bool(a) and bool(eval_rule(e.right, f, K)))
    if op == "or":
        return int(bool(a) or bool(eval_rule(e.right, f, K)))
    b = eval_rule(e.right, f, K)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "%":
        if b < 1:
            raise ModulusNonPositive(f"divisor {b} in {serialize(e)}")
        return a % b
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    raise ValueError(f"unknown operator {op}")


class _BadModulus(Exception):
    def __init__(self, mask):
        self.mask = mask


def eval_rule_array(e: RuleExpr, f: Mapping[str, np.ndarray], K) -> np.ndarray:
    """Vectorized evaluation: neighbor values and ``K`` may be broadcastable arrays."""
    try:
        return np.asarray(_eval_arr(e, f, K), dtype=np.int64)
    except _BadModulus as exc:
        raise ModulusNonPositive(f"non-positive divisor in {serialize(e)}") from exc


def _eval_arr(e, f, K):
    if isinstance(e, Int):
        return np.int64(e.value)
    if isinstance(e, Param):
        return np.asarray(K, dtype=np.int64)
    if isinstance(e, Ref):
        return np.asarray(f[e.name], dtype=np.int64)
    if isinstance(e, Not):
        return (_eval_arr(e.arg, f, K) == 0).astype(np.int64)
    if isinstance(e, Ite):
        c = _eval_arr(e.cond, f, K) != 0
        return np.where(c, _eval_arr(e.then, f, K), _eval_arr(e.other, f, K))
    a = _eval_arr(e.left, f, K)
    b = _eval_arr(e.right, f, K)
    op = e.op
    if op == "and":
        return ((a != 0) & (b != 0)).astype(np.int64)
    if op == "or":
        return ((a != 0) | (b != 0)).astype(np.int64)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "%":
        bad = b < 1
        if np.any(bad):
            raise _BadModulus(bad)
        return np.mod(a, b)
    if op == "==":
        return (a == b).astype(np.int64)
    if op == "!=":
        return (a != b).astype(np.int64)
    if op == "<":
        return (a < b).astype(np.int64)
    if op == "<=":
        return (a <= b).astype(np.int64)
    raise ValueError(f"unknown operator {op}")


# -- tabulation and range checking --------------------------------------------


def local_config_grid(n_names: int, n_states: int) -> np.ndarray:
    """All local configurations as rows, in lexicographic (table index) order."""
    if n_names == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n_states,) * n_names).reshape(n_names, -1)
    return grids.T.astype(np.int64)


def _tabulate_raw(e: RuleExpr, names: Sequence[str], n_states: int, K: int):
    grid = local_config_grid(len(names), n_states)
    env = {name: grid[:, j] for j, name in enumerate(names)}
    for name in e.names():
        env.setdefault(name, np.zeros(len(grid), dtype=np.int64))
    out = _eval_arr(e, env, K)
    return grid, np.broadcast_to(np.asarray(out, dtype=np.int64), (len(grid),))


def check_range(e: RuleExpr, names: Sequence[str], n_states: int, K: int) -> Verdict:
    """Enumerate every local configuration; pass iff all outputs lie in ``0..n_states-1``."""
    unknown = e.names() - set(names)
    if unknown:
        return Verdict.failed(f"unknown neighbor name(s) {sorted(unknown)}", names=sorted(unknown))
    try:
        grid, out = _tabulate_raw(e, names, n_states, K)
    except _BadModulus as exc:
        i = int(np.flatnonzero(np.broadcast_to(exc.mask, (n_states ** len(names),)))[0])
        f = dict(zip(names, (int(v) for v in local_config_grid(len(names), n_states)[i])))
        return Verdict.failed("modulus divisor below 1", local_config=f, K=K)
    bad = np.flatnonzero((out < 0) | (out >= n_states))
    if len(bad):
        i = int(bad[0])
        f = dict(zip(names, (int(v) for v in grid[i])))
        return Verdict.failed(
            f"output {int(out[i])} outside 0..{n_states - 1}", local_config=f, output=int(out[i]), K=K
        )
    return Verdict.passed()


def tabulate(e: RuleExpr, names: Sequence[str], n_states: int, K: int) -> np.ndarray:
    """Rule outputs over all local configurations; raises if any is invalid."""
    v = check_range(e, names, n_states, K)
    if not v.ok:
        raise ValueError(f"rule {serialize(e)} (K={K}) is not a valid local rule: {v.reason}")
    _, out = _tabulate_raw(e, names, n_states, K)
    return np.ascontiguousarray(out, dtype=np.int64)


def iter_local_configs(n_names: int, n_states: int):
    return itertools.product(range(n_states), repeat=n_names)
