import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mca import zoo
from mca.automaton import (
    act,
    evaluation_map,
    evolve,
    global_step,
    is_orbit_invariant,
    local_configs,
    local_view,
    orbit_relation,
    reachable_set,
    restrict_to,
    step_array,
    validate,
)
from mca.common import NotClosed, NotOrbitInvariant
from mca.monoid import Word
from mca.rulelang import eval_rule


def naive_step(ca, c):
    """Straight from the definition: look up each neighbor, evaluate the expression."""
    out = []
    for x in ca.cells:
        f = {n: c[ca.index[ca.act(x, w)]] for n, w in ca.neighborhood}
        out.append(eval_rule(ca.rules[ca.index[x]], f, int(ca.params[ca.index[x]])))
    return tuple(out)


POOL = [zoo.cyclic6, zoo.wxyz, zoo.circle_lasso, zoo.two_circles, zoo.xor_ring2, lambda: zoo.ring(7)]


def test_validate_examples(c6, wx):
    assert validate(c6).ok
    assert validate(wx).ok
    table = c6.table.copy()
    table[0, 1] = 2  # k0.q -> k2
    v = validate(c6.replace(action=table))
    assert not v.ok
    assert v.witness["relation"] == (Word("pq"), Word())
    assert v.witness["cell"] == "k5"


def test_validate_other_failures(c6):
    table = c6.table.copy()
    table[3, 0] = -1
    assert not validate(c6.replace(action=table)).ok
    assert not validate(c6.replace(state_count=3)).ok  # outputs reach 5
    assert not validate(c6.replace(neighborhood=(("a", "p"), ("a", "q")), rules="n(a)")).ok
    assert not validate(c6.replace(rules="n(zz)")).ok


def test_act_examples(c6, wx):
    assert act(c6, "k0", "p.p.p") == "k3"
    assert act(wx, "w", "l.r") == "y"
    for x in wx.cells:
        assert act(wx, x, "ε") == x


@given(st.lists(st.sampled_from("lr"), max_size=5), st.lists(st.sampled_from("lr"), max_size=5), st.sampled_from("wxyz"))
def test_act_composes(u, v, x):
    wx = zoo.wxyz()
    u, v = Word(u), Word(v)
    assert wx.act(x, u + v) == wx.act(wx.act(x, u), v)


def test_orbit_examples(wx):
    assert orbit_relation(wx, "w").classes == (("z",), ("l", "r"))
    assert orbit_relation(wx, "y").classes == (("z",), ("l",), ("r",))
    t = zoo.trivial_action()
    assert orbit_relation(t, "t0").classes == (("z", "p1", "q1"),)
    assert len(list(local_configs(t, "t0"))) == 6
    assert all(len(set(f)) == 1 for f in local_configs(t, "t0"))


@pytest.mark.parametrize("make", POOL)
def test_orbit_relation_is_equivalence_and_counts(make):
    ca = make()
    names = ca.nbr_names
    for x in ca.cells:
        rel = orbit_relation(ca, x)
        for a in names:
            assert rel.related(a, a)
            for b in names:
                assert rel.related(a, b) == rel.related(b, a)
                for c in names:
                    if rel.related(a, b) and rel.related(b, c):
                        assert rel.related(a, c)
        configs = list(local_configs(ca, x))
        assert len(configs) == ca.state_count ** len(rel.classes) == len(set(configs))
        brute = [f for f in itertools.product(range(ca.state_count), repeat=len(names)) if is_orbit_invariant(ca, x, f)]
        assert sorted(configs) == brute
        targets = [ca.act(x, w) for w in ca.nbr_words]
        if len(set(targets)) == len(targets):
            assert len(configs) == ca.state_count ** len(names)


def test_orbit_invariance_examples(wx):
    assert is_orbit_invariant(wx, "w", (0, 1, 1))
    assert not is_orbit_invariant(wx, "w", (0, 0, 1))
    for x in wx.cells:
        assert is_orbit_invariant(wx, x, (1, 1, 1))


def test_local_view_examples(c6, wx):
    assert local_view(wx, "y", (0, 0, 0, 1)) == (0, 0, 1)
    assert local_view(c6, "k3", (0, 0, 2, 0, 0, 0)) == (2, 0, 0)
    assert local_view(c6, "k1", (4,) * 6) == (4, 4, 4)


def test_evaluation_map_examples(c6, wx):
    assert evaluation_map(c6, "k3", (2, 0, 0)) == 2
    assert evaluation_map(wx, "z", (0, 0, 0)) == 1
    assert all(evaluation_map(c6, x, (0, 0, 0)) == 0 for x in c6.cells)
    with pytest.raises(NotOrbitInvariant):
        evaluation_map(wx, "w", (0, 0, 1))


def test_global_step_examples(c6, wx):
    assert global_step(c6, (0, 0, 2, 0, 0, 0)) == (0, 0, 2, 2, 0, 0)
    assert global_step(c6, (0, 1, 0, 2, 0, 3)) == (0, 1, 0, 2, 0, 3)
    assert global_step(wx, (0, 0, 0, 0)) == (0, 0, 0, 1)
    assert global_step(wx, {"w": 0, "x": 0, "y": 0, "z": 0}) == (0, 0, 0, 1)
    out = global_step(c6, np.array([0, 0, 2, 0, 0, 0]))
    assert isinstance(out, np.ndarray) and out.tolist() == [0, 0, 2, 2, 0, 0]


def test_configuration_range_checked(c6):
    with pytest.raises(ValueError):
        global_step(c6, (0, 0, 6, 0, 0, 0))
    with pytest.raises(ValueError):
        global_step(c6, (0, 0))


@pytest.mark.parametrize("k", range(len(POOL)))
def test_global_step_matches_definition(k):
    ca = POOL[k]()
    rng = np.random.default_rng(k)
    for _ in range(50):
        c = tuple(int(v) for v in rng.integers(0, ca.state_count, len(ca.cells)))
        assert global_step(ca, c) == naive_step(ca, c)
        assert step_array(ca, np.array(c)).tolist() == list(naive_step(ca, c))


@pytest.mark.parametrize("seed", range(30))
def test_random_automata_step_matches_definition(seed):
    ca = zoo.random_automaton(seed)
    assert validate(ca).ok
    rng = np.random.default_rng(seed)
    for _ in range(10):
        c = tuple(int(v) for v in rng.integers(0, ca.state_count, len(ca.cells)))
        assert global_step(ca, c) == naive_step(ca, c)


@given(st.data())
def test_locality(data):
    ca = zoo.circle_lasso()
    c = data.draw(st.lists(st.integers(0, 5), min_size=7, max_size=7))
    x = data.draw(st.sampled_from(ca.cells))
    seen = {ca.act(x, w) for w in ca.nbr_words}
    other = [y for y in ca.cells if y not in seen]
    if not other:
        return
    y = data.draw(st.sampled_from(other))
    d = list(c)
    d[ca.index[y]] = data.draw(st.integers(0, 5))
    i = ca.index[x]
    assert global_step(ca, tuple(c))[i] == global_step(ca, tuple(d))[i]


def test_quiescent_constant_configuration(c6):
    assert global_step(c6, (0,) * 6) == (0,) * 6


def test_evolve_examples(c6):
    rows = evolve(c6, (0, 0, 1, 0, 1, 4), 7)
    assert len(rows) == 8 and rows[7] == rows[0]
    assert evolve(c6, (1, 2, 3, 4, 5, 0), 0) == [(1, 2, 3, 4, 5, 0)]


@given(st.lists(st.integers(0, 5), min_size=6, max_size=6), st.integers(0, 6), st.integers(0, 6))
def test_evolve_splits(c, a, b):
    c6 = zoo.cyclic6()
    whole = evolve(c6, c, a + b)
    first = evolve(c6, c, a)
    assert whole == first + evolve(c6, first[-1], b)[1:]


def test_reachable_set(c6, wx):
    cells, words = reachable_set(c6, "k0")
    assert cells == set(c6.cells)
    assert words["k2"] == Word("pp")
    assert words["k5"] == Word("q")
    assert reachable_set(wx, "w")[0] == set("wxyz")
    assert reachable_set(wx, "z")[0] == {"z"}
    for x, w in words.items():
        assert c6.act("k0", w) == x


def test_restrict_to(wx, c6):
    rows = zoo.stacked_rings(3, 2)
    sub = restrict_to(rows, ["r0_0", "r0_1", "r0_2"])
    assert validate(sub).ok
    assert sub.table.tolist() == zoo.ring(3).table.tolist()
    assert restrict_to(c6, c6.cells) == c6
    with pytest.raises(NotClosed) as e:
        restrict_to(wx, ["w"])
    assert (e.value.cell, e.value.generator) == ("w", "l")
