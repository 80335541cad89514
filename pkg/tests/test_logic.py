import itertools

import pytest
from hypothesis import given, strategies as st

from mca import zoo
from mca.automaton import CellularAutomaton, evaluation_map, global_step, local_configs, local_view
from mca.common import AtomOutOfRange, CapExceeded, Exhaustive, ParseError, Sample
from mca.logic import (
    FALSE,
    KINDS,
    TRUE,
    And,
    Atom,
    F,
    FBounded,
    G,
    GBounded,
    Implies,
    ModelChecker,
    Next,
    Not,
    Or,
    Space,
    U,
    UBounded,
    check,
    formula_kind,
    lasso,
    parse_formula,
    probe_config_formula,
    probe_rule_formula,
    quiescence_formula,
    random_formula,
    serialize,
    spatial_words,
    valid,
)
from mca.monoid import EMPTY, Word, free_monoid

LEFT = (0, 0, 2, 0, 0, 0)
RIGHT = (0, 0, 1, 0, 1, 4)


def naive_lasso(ca, c):
    seen, traj = {}, []
    while c not in seen:
        seen[c] = len(traj)
        traj.append(c)
        c = global_step(ca, c)
    return seen[c], len(traj) - seen[c]


def naive(ca, x, c, phi):
    """Forcing computed from the definitions, with infinite ranges cut at a safe horizon."""
    mu, lam = naive_lasso(ca, c)
    horizon = mu + lam + 2

    def later(k):
        d = c
        for _ in range(k):
            d = global_step(ca, d)
        return d

    t = type(phi)
    if t is Atom:
        return c[ca.index[x]] == phi.state
    if t is Not:
        return not naive(ca, x, c, phi.arg)
    if t is And:
        return all(naive(ca, x, c, a) for a in phi.args)
    if t is Or:
        return any(naive(ca, x, c, a) for a in phi.args)
    if t is Implies:
        return not naive(ca, x, c, phi.left) or naive(ca, x, c, phi.right)
    if t is Space:
        return naive(ca, ca.act(x, phi.word), c, phi.arg)
    if t is Next:
        return naive(ca, x, later(1), phi.arg)
    n_max = phi.t if t in (FBounded, GBounded, UBounded) else horizon
    if t in (F, FBounded):
        return any(naive(ca, x, later(n), phi.arg) for n in range(n_max + 1))
    if t in (G, GBounded):
        return all(naive(ca, x, later(n), phi.arg) for n in range(n_max + 1))
    return any(
        all(naive(ca, x, later(i), phi.left) for i in range(n + 1)) and naive(ca, x, later(n + 1), phi.right)
        for n in range(n_max + 1)
    )


# -- syntax ---------------------------------------------------------------------


def test_parse_examples(wx):
    assert parse_formula("O <r> #1", wx.pres) == Next(Space(Word("r"), Atom(1)))
    assert parse_formula("#0", wx.pres) == Atom(0)
    assert parse_formula("(#0 -> O #0)", wx.pres) == Implies(Atom(0), Next(Atom(0)))
    assert parse_formula("true", wx.pres) == TRUE
    assert parse_formula("false", wx.pres) == FALSE
    assert parse_formula("<l.r> #1", wx.pres) == Space(Word("lr"), Atom(1))
    assert parse_formula("<ε> #1", wx.pres) == Space(EMPTY, Atom(1))


def test_precedence(wx):
    p = wx.pres
    assert parse_formula("!#0 & #1", p) == And((Not(Atom(0)), Atom(1)))
    assert parse_formula("#0 & #1 | #2", p) == Or((And((Atom(0), Atom(1))), Atom(2)))
    assert parse_formula("#0 -> #1 -> #2", p) == Implies(Atom(0), Implies(Atom(1), Atom(2)))
    assert parse_formula("#0 | #1 -> #2", p) == Implies(Or((Atom(0), Atom(1))), Atom(2))
    assert parse_formula("#0 U #1 & #2", p) == And((U(Atom(0), Atom(1)), Atom(2)))
    assert parse_formula("#0 U #1 U #2", p) == U(Atom(0), U(Atom(1), Atom(2)))
    assert parse_formula("F[3] G #1", p) == FBounded(3, G(Atom(1)))
    assert parse_formula("#0 U[2] #1", p) == UBounded(2, Atom(0), Atom(1))
    assert parse_formula("#0 & #1 & #2", p) == And((Atom(0), Atom(1), Atom(2)))


@pytest.mark.parametrize("bad", ["", "#", "#0 &", "<r #1", "O", "(#0", "#0 #1", "F[x] #0", "U #0"])
def test_syntax_errors(wx, bad):
    with pytest.raises(ParseError):
        parse_formula(bad, wx.pres)


def test_unknown_generator(wx):
    from mca.common import UnknownGenerator

    with pytest.raises(UnknownGenerator):
        parse_formula("<p> #0", wx.pres)


formulas = st.recursive(
    st.integers(0, 3).map(Atom) | st.sampled_from([TRUE, FALSE]),
    lambda ch: st.one_of(
        ch.map(Not),
        ch.map(Next),
        ch.map(F),
        ch.map(G),
        st.lists(ch, min_size=1, max_size=3).map(lambda a: And(tuple(a))),
        st.lists(ch, min_size=1, max_size=3).map(lambda a: Or(tuple(a))),
        st.tuples(ch, ch).map(lambda t: Implies(*t)),
        st.tuples(ch, ch).map(lambda t: U(*t)),
        st.tuples(st.integers(0, 3), ch).map(lambda t: FBounded(*t)),
        st.tuples(st.integers(0, 3), ch).map(lambda t: GBounded(*t)),
        st.tuples(st.integers(0, 3), ch, ch).map(lambda t: UBounded(*t)),
        st.tuples(st.lists(st.sampled_from("lr"), max_size=3).map(Word), ch).map(lambda t: Space(*t)),
    ),
    max_leaves=10,
)


def _canon(phi):
    """Singleton conjunctions and disjunctions print as their only argument."""
    if isinstance(phi, (And, Or)):
        args = tuple(_canon(a) for a in phi.args)
        return args[0] if len(args) == 1 else type(phi)(args)
    fields = {k: (_canon(v) if hasattr(v, "__dataclass_fields__") else v) for k, v in vars(phi).items()}
    return type(phi)(**fields)


@given(formulas)
def test_serialize_round_trip(phi):
    pres = free_monoid("l", "r")
    text = serialize(phi)
    back = parse_formula(text, pres)
    assert _canon(back) == _canon(phi)
    assert serialize(back) == text


# -- semantics ----------------------------------------------------------------------


def test_check_examples(c6, wx):
    assert check(wx, "y", (0, 0, 0, 0), parse_formula("O <r> #1", wx.pres))
    assert not check(c6, "k0", LEFT, FALSE)
    assert check(c6, "k0", RIGHT, parse_formula("F G #0", c6.pres))
    with pytest.raises(AtomOutOfRange):
        check(wx, "y", (0, 0, 0, 0), Atom(2))


def test_lasso_examples(c6):
    assert lasso(c6, RIGHT) == (0, 7)
    assert lasso(c6, LEFT) == (6, 1)
    assert lasso(c6, (0, 1, 0, 2, 0, 3)) == (0, 1)


@pytest.mark.parametrize("c", [LEFT, RIGHT, (1, 2, 3, 4, 5, 0), (5, 5, 5, 5, 5, 5)])
def test_lasso_minimal(c6, c):
    mu, lam, traj = ModelChecker(c6).lasso(c)
    assert len(traj) == mu + lam == len(set(traj))
    assert ModelChecker(c6).iterate(c, mu + lam) == traj[mu]
    assert (mu, lam) == naive_lasso(c6, c)


def test_valid_examples(c6):
    assert valid(c6, "k0", quiescence_formula(c6, 0)).ok
    neg = zoo.single_cell("1 - n(z)")
    v = valid(neg, "x", parse_formula("#0 -> O #0", neg.pres))
    assert not v.ok and v.witness["counterexample"] == (0,)
    assert valid(c6, "k0", TRUE, Exhaustive()).ok
    with pytest.raises(CapExceeded):
        valid(c6, "k0", TRUE, Exhaustive(cap=100))
    assert valid(c6, "k0", TRUE, Sample(20, seed=3)).ok


def test_sampled_validity_is_deterministic(c6):
    phi = parse_formula("#0 -> O #0", c6.pres)
    a = valid(c6, "k2", phi, Sample(50, seed=9))
    b = valid(c6, "k2", phi, Sample(50, seed=9))
    assert a == b and not a.ok


POOL = [zoo.cyclic6, zoo.wxyz, zoo.circle_lasso, zoo.xor_ring2]


@pytest.mark.parametrize("k", range(len(POOL)))
def test_model_checker_agrees_with_naive_semantics(k):
    import random

    ca = POOL[k]()
    rng = random.Random(k)
    mc = ModelChecker(ca)
    for trial in range(60):
        phi = random_formula(rng.randrange(10**6), 3, ca)
        # sprinkle in unbounded operators
        phi = rng.choice([phi, F(phi), G(phi), U(phi, Atom(0)), Not(F(Not(phi)))])
        c = tuple(rng.randrange(ca.state_count) for _ in ca.cells)
        x = rng.choice(ca.cells)
        assert mc.check(x, c, phi) == naive(ca, x, c, phi), (serialize(phi), c, x)


def test_wxyz_example_formulas(wx):
    row0 = (0, 0, 0, 0)
    p = wx.pres
    assert check(wx, "z", row0, parse_formula("O #1 & O O #0", p))
    assert check(wx, "w", row0, parse_formula("F[4] #1", p))
    assert not check(wx, "w", row0, parse_formula("F[3] #1", p))
    assert check(wx, "x", row0, parse_formula("#0 U #1", p))


@given(
    st.sampled_from(range(len(POOL))),
    st.data(),
)
def test_space_composes(k, data):
    ca = POOL[k]()
    gens = ca.pres.generators
    u = Word(data.draw(st.lists(st.sampled_from(gens), max_size=3)))
    v = Word(data.draw(st.lists(st.sampled_from(gens), max_size=3)))
    c = tuple(data.draw(st.lists(st.integers(0, ca.state_count - 1), min_size=len(ca.cells), max_size=len(ca.cells))))
    x = data.draw(st.sampled_from(ca.cells))
    phi = random_formula(data.draw(st.integers(0, 10**6)), 2, ca)
    mc = ModelChecker(ca)
    assert mc.check(x, c, Space(u, Space(v, phi))) == mc.check(x, c, Space(u + v, phi))
    assert mc.check(x, c, Space(EMPTY, phi)) == mc.check(x, c, phi)
    assert mc.check(x, c, Not(phi)) != mc.check(x, c, phi)
    psi = random_formula(data.draw(st.integers(0, 10**6)), 2, ca)
    assert mc.check(x, c, Next(And((phi, psi)))) == (mc.check(x, c, Next(phi)) and mc.check(x, c, Next(psi)))
    assert mc.check(x, c, And((phi, psi))) == mc.check(x, c, And((psi, phi, phi)))


@given(st.lists(st.integers(0, 5), min_size=6, max_size=6), st.integers(0, 10**6))
def test_unbounded_matches_bounded_beyond_lasso(c, seed):
    c6 = zoo.cyclic6()
    c = tuple(c)
    mu, lam = lasso(c6, c)
    phi = random_formula(seed, 2, c6)
    mc = ModelChecker(c6)
    for x in ("k0", "k3"):
        for t in (mu + lam, mu + lam + 3):
            assert mc.check(x, c, F(phi)) == mc.check(x, c, FBounded(t, phi))
            assert mc.check(x, c, G(phi)) == mc.check(x, c, GBounded(t, phi))
            assert mc.check(x, c, U(phi, Atom(0))) == mc.check(x, c, UBounded(t, phi, Atom(0)))


# -- probes ---------------------------------------------------------------------------


def test_probe_examples(wx, c6):
    assert serialize(probe_config_formula(wx, "w", (0, 1, 1))) == "<ε> #0 & <l> #1 & <r> #1"
    empty = CellularAutomaton(free_monoid("g"), ["x"], {("x", "g"): "x"}, 2, (), "0")
    assert probe_config_formula(empty, "x", ()) == TRUE
    probe = probe_config_formula(c6, "k3", (2, 0, 0))
    assert len(probe.args) == 3
    assert check(c6, "k3", LEFT, probe)
    assert not check(c6, "k3", (0, 0, 2, 0, 1, 0), probe)
    assert check(c6, "k3", LEFT, probe_rule_formula(c6, "k3", (2, 0, 0), 2))
    assert not check(c6, "k3", LEFT, probe_rule_formula(c6, "k3", (2, 0, 0), 3))
    assert quiescence_formula(c6, 0) == probe_rule_formula(c6, "k0", (0, 0, 0), 0)


@pytest.mark.parametrize("make", [zoo.cyclic6, zoo.wxyz])
def test_probes_agree_with_direct_computation(make):
    ca = make()
    mc = ModelChecker(ca)
    configs = list(itertools.product(range(ca.state_count), repeat=len(ca.cells)))
    configs = configs[:: max(1, len(configs) // 60)]
    for x in ca.cells:
        for f in local_configs(ca, x):
            probe = probe_config_formula(ca, x, f)
            out = evaluation_map(ca, x, f)
            rule = probe_rule_formula(ca, x, f, out)
            wrong = probe_rule_formula(ca, x, f, (out + 1) % ca.state_count)
            for c in configs:
                matches = local_view(ca, x, c) == f
                assert mc.check(x, c, probe) == matches
                assert mc.check(x, c, rule)
                if matches and ca.state_count > 1:
                    assert not mc.check(x, c, wrong)


# -- random formulas ----------------------------------------------------------------


def test_random_formula_basics(c6):
    assert isinstance(random_formula(1, 0, c6), Atom)
    assert random_formula(7, 3, c6) == random_formula(7, 3, c6)
    words = set(spatial_words(c6))
    seen = set()
    for seed in range(1000):
        phi = random_formula(seed, 3, c6)
        stack = [phi]
        while stack:
            p = stack.pop()
            seen.add(formula_kind(p))
            assert formula_kind(p) not in ("f", "g", "u")
            if isinstance(p, Atom):
                assert 0 <= p.state < 6
            if isinstance(p, Space):
                assert p.word in words
            if isinstance(p, (And, Or)):
                assert 2 <= len(p.args) <= 3
            stack.extend(v for v in vars(p).values() if hasattr(v, "__dataclass_fields__"))
            stack.extend(getattr(p, "args", ()))
    assert seen == set(KINDS)
