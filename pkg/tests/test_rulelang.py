import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mca.common import ModulusNonPositive, ParseError
from mca.rulelang import (
    BinOp,
    Int,
    Ite,
    Not,
    Param,
    Ref,
    check_range,
    eval_rule,
    eval_rule_array,
    local_config_grid,
    parse_rule,
    serialize,
    tabulate,
)

CYC_RULE = "(n(m1)+n(z)+n(p1)) % (K+1)"
NAMES = ("a", "b", "c")


def test_parse_examples():
    e = parse_rule(CYC_RULE)
    assert e == BinOp("%", BinOp("+", BinOp("+", Ref("m1"), Ref("z")), Ref("p1")), BinOp("+", Param(), Int(1)))
    assert parse_rule("0") == Int(0)
    assert parse_rule("if n(z)==0 then 1 else 0") == Ite(BinOp("==", Ref("z"), Int(0)), Int(1), Int(0))


def test_precedence_and_associativity():
    assert eval_rule(parse_rule("2 + 3 * 4"), {}, 0) == 14
    assert eval_rule(parse_rule("10 - 3 - 2"), {}, 0) == 5
    assert eval_rule(parse_rule("7 % 4 * 2"), {}, 0) == 6
    assert eval_rule(parse_rule("1 < 2 and 3 <= 2 or not 0"), {}, 0) == 1
    assert eval_rule(parse_rule("not 1 == 1"), {}, 0) == 0  # (not 1) == 1


@pytest.mark.parametrize("bad", ["", "1 +", "n(1)", "if 1 then 2", "(1", "1 2", "n z", "K(1)", "3 $ 4"])
def test_syntax_errors(bad):
    with pytest.raises(ParseError):
        parse_rule(bad)


def test_else_branch_needs_parentheses_for_nested_conditionals():
    with pytest.raises(ParseError):
        parse_rule("if 1 then 2 else if 0 then 3 else 4")
    assert eval_rule(parse_rule("if 0 then 2 else (if 0 then 3 else 4)"), {}, 0) == 4


def test_eval_examples():
    e = parse_rule(CYC_RULE)
    assert eval_rule(e, {"m1": 2, "z": 0, "p1": 0}, 3) == 2
    assert eval_rule(parse_rule("5"), {"z": 1}, 0) == 5
    assert eval_rule(parse_rule("(n(a)+n(b)) % 2"), {"a": 1, "b": 1}, 0) == 0


def test_modulus_is_mathematical():
    assert eval_rule(parse_rule("(0 - 3) % 5"), {}, 0) == 2
    with pytest.raises(ModulusNonPositive):
        eval_rule(parse_rule("1 % K"), {}, 0)
    with pytest.raises(ModulusNonPositive):
        eval_rule(parse_rule("1 % (0 - 2)"), {}, 0)


def test_check_range():
    assert check_range(parse_rule(CYC_RULE), ("m1", "z", "p1"), 6, 5).ok
    v = check_range(parse_rule("n(z)+1"), ("z",), 2, 0)
    assert not v.ok and v.witness["local_config"] == {"z": 1}
    assert check_range(parse_rule("0"), ("z",), 2, 0).ok
    v = check_range(parse_rule("n(z) % n(z)"), ("z",), 2, 0)
    assert not v.ok and v.witness["local_config"] == {"z": 0}
    assert not check_range(parse_rule("n(q)"), ("z",), 2, 0).ok


def test_tabulate_matches_scalar_evaluation():
    e = parse_rule("if n(a) < n(b) then (n(a) * K + n(c)) % 3 else n(a) - n(b)")
    t = tabulate(e, NAMES, 3, 2)
    for idx, f in enumerate(itertools.product(range(3), repeat=3)):
        assert t[idx] == eval_rule(e, dict(zip(NAMES, f)), 2)


# -- random expressions ------------------------------------------------------

atoms = st.one_of(st.integers(0, 9).map(Int), st.just(Param()), st.sampled_from(NAMES).map(Ref))


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*", "==", "!=", "<", "<=", "and", "or"]), children, children).map(
            lambda t: BinOp(*t)
        ),
        children.map(Not),
        st.tuples(children, children, children).map(lambda t: Ite(*t)),
    )


exprs = st.recursive(atoms, _extend, max_leaves=12)


@given(exprs)
def test_serialize_round_trip(e):
    text = serialize(e)
    assert parse_rule(text) == e
    assert serialize(parse_rule(text)) == text


@given(exprs, st.integers(0, 4))
def test_vector_evaluation_agrees(e, K):
    grid = local_config_grid(3, 3)
    arrs = {n: grid[:, i] for i, n in enumerate(NAMES)}
    vec = eval_rule_array(e, arrs, K)
    for row, v in zip(grid, np.broadcast_to(vec, (len(grid),))):
        assert v == eval_rule(e, dict(zip(NAMES, map(int, row))), K)


@given(exprs, st.tuples(*[st.integers(0, 2)] * 3), st.integers(0, 2))
def test_unreferenced_names_do_not_matter(e, f, other):
    base = dict(zip(NAMES, f))
    used = e.names()
    for n in NAMES:
        if n not in used:
            assert eval_rule(e, {**base, n: other}, 1) == eval_rule(e, base, 1)
