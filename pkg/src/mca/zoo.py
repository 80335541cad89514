"""Ready-made automata: the running examples plus a few small families used in tests."""

from __future__ import annotations

import random

import numpy as np

from .automaton import CellularAutomaton, local_configs, restrict_to
from .equivalence import CellMapSpec, Const, Copy, SectionSpec
from .monoid import MonoidPresentation, Word, free_monoid

RING_RULE = "(n(m1) + n(z) + n(p1)) % (K + 1)"


def cyclic_presentation() -> MonoidPresentation:
    """Two generators p, q that are mutually inverse."""
    return MonoidPresentation(("p", "q"), ((Word(("p", "q")), Word()), (Word(("q", "p")), Word())))


def _ring_table(n: int) -> np.ndarray:
    i = np.arange(n, dtype=np.int64)
    return np.stack([(i + 1) % n, (i - 1) % n], axis=1)


RING_NBHD = (("m1", "q"), ("z", "ε"), ("p1", "p"))


def ring(n: int, states: int = 2, rule: str = "(n(m1) + n(z) + n(p1)) % 2", params=None) -> CellularAutomaton:
    """Cells k0..k{n-1}; p moves right, q moves left."""
    return CellularAutomaton(
        cyclic_presentation(),
        [f"k{i}" for i in range(n)],
        _ring_table(n),
        states,
        RING_NBHD,
        rule,
        params=params,
        base="k0",
    )


def cyclic6() -> CellularAutomaton:
    """Six cells on a circle; cell k_i adds its three neighbors modulo i + 1."""
    return ring(6, states=6, rule=RING_RULE, params=list(range(6)))


def wxyz() -> CellularAutomaton:
    pres = free_monoid("l", "r")
    action = {
        ("w", "l"): "x", ("w", "r"): "x",
        ("x", "l"): "x", ("x", "r"): "y",
        ("y", "l"): "x", ("y", "r"): "z",
        ("z", "l"): "z", ("z", "r"): "z",
    }
    middle = "if n(z) == 1 or n(r) == 1 then 1 else 0"
    rules = {
        "w": "if n(r) == 1 and n(z) == 0 then 1 else 0",
        "x": middle,
        "y": middle,
        "z": "if n(z) == 0 then 1 else 0",
    }
    nbhd = (("z", "ε"), ("l", "l"), ("r", "r"))
    return CellularAutomaton(pres, "wxyz", action, 2, nbhd, rules, base="w")


CIRCLE_RULE = "(n(z) + n(s1)) % (K + 1)"
CIRCLE_NBHD = (("z", "ε"), ("s1", "s"))


def two_circles(size: int = 6, copies: int = 2) -> CellularAutomaton:
    """Disjoint circles c{i}_0..c{i}_{size-1}; cell c{i}_m adds itself and its successor modulo m + 1."""
    cells = [f"c{i}_{m}" for i in range(copies) for m in range(size)]
    action = {(f"c{i}_{m}", "s"): f"c{i}_{(m + 1) % size}" for i in range(copies) for m in range(size)}
    params = [m for _ in range(copies) for m in range(size)]
    return CellularAutomaton(free_monoid("s"), cells, action, size, CIRCLE_NBHD, CIRCLE_RULE, params, base="c0_0")


def circle_lasso(size: int = 6) -> CellularAutomaton:
    """One circle y0..y{size-1} plus a tail cell ``a`` feeding into y0."""
    cells = [f"y{m}" for m in range(size)] + ["a"]
    action = {(f"y{m}", "s"): f"y{(m + 1) % size}" for m in range(size)}
    action["a", "s"] = "y0"
    rules = {"*": CIRCLE_RULE, "a": f"(n(z) + 1) % {size}"}
    params = {f"y{m}": m for m in range(size)}
    return CellularAutomaton(free_monoid("s"), cells, action, size, CIRCLE_NBHD, rules, params, base="y0")


def first_circle(size: int = 6) -> CellularAutomaton:
    """Copy 0 of :func:`two_circles` as an automaton of its own."""
    return restrict_to(two_circles(size), [f"c0_{m}" for m in range(size)])


def circle_morphism(size: int = 6) -> tuple[CellMapSpec, SectionSpec]:
    """Based morphism from :func:`first_circle` into :func:`circle_lasso` with its section."""
    f = CellMapSpec({f"c0_{m}": f"y{m}" for m in range(size)})
    s = SectionSpec({f"y{m}": Copy(f"c0_{m}") for m in range(size)} | {"a": Const(0)})
    return f, s


def stacked_rings(n: int, rows: int, states: int = 2, rule: str = "(n(m1) + n(z) + n(p1)) % 2") -> CellularAutomaton:
    """``rows`` disjoint copies of :func:`ring`; cells r{row}_{i}, generators move along rows."""
    cells = [f"r{j}_{i}" for j in range(rows) for i in range(n)]
    table = np.concatenate([_ring_table(n) + j * n for j in range(rows)])
    return CellularAutomaton(cyclic_presentation(), cells, table, states, RING_NBHD, rule, base="r0_0")


def ring_into_rows(n: int, rows: int, row: int = 0) -> tuple[CellMapSpec, SectionSpec]:
    """Embed ring(n) as one row of stacked_rings(n, rows), zero elsewhere."""
    f = CellMapSpec({f"k{i}": f"r{row}_{i}" for i in range(n)})
    s = SectionSpec(
        {f"r{j}_{i}": (Copy(f"k{i}") if j == row else Const(0)) for j in range(rows) for i in range(n)}
    )
    return f, s


def identity_morphism(ca: CellularAutomaton) -> tuple[CellMapSpec, SectionSpec]:
    return CellMapSpec({c: c for c in ca.cells}), SectionSpec({c: Copy(c) for c in ca.cells})


def rotation(n: int, r: int) -> tuple[CellMapSpec, SectionSpec]:
    """Rotate ring(n) by ``r`` cells onto itself."""
    f = CellMapSpec({f"k{i}": f"k{(i + r) % n}" for i in range(n)})
    s = SectionSpec({f"k{(i + r) % n}": Copy(f"k{i}") for i in range(n)})
    return f, s


def xor_ring2() -> CellularAutomaton:
    pres = MonoidPresentation(("p",), ((Word(("p", "p")), Word()),))
    action = {("k0", "p"): "k1", ("k1", "p"): "k0"}
    return CellularAutomaton(pres, ["k0", "k1"], action, 2, (("z", "ε"), ("p1", "p")), "(n(z) + n(p1)) % 2", base="k0")


def single_cell(rule: str = "n(z)", states: int = 2) -> CellularAutomaton:
    return CellularAutomaton(free_monoid("g"), ["x"], {("x", "g"): "x"}, states, (("z", "ε"),), rule, base="x")


def oneway_gamma() -> CellularAutomaton:
    """Two cells swapped by an involution g."""
    pres = MonoidPresentation(("g",), ((Word(("g", "g")), Word()),))
    action = {("x0", "g"): "x1", ("x1", "g"): "x0"}
    return CellularAutomaton(pres, ["x0", "x1"], action, 1, (("z", "ε"),), "0", base="x0")


def oneway_delta() -> CellularAutomaton:
    """x0 moves to x1, which then stays put."""
    action = {("x0", "g"): "x1", ("x1", "g"): "x1"}
    return CellularAutomaton(free_monoid("g"), ["x0", "x1"], action, 1, (("z", "ε"),), "0", base="x0")


# -- random automata -------------------------------------------------------------

_TEMPLATES = (
    "(n({a}) + n({b})) % {S}",
    "(n({a}) * n({b}) + K) % {S}",
    "if n({a}) == n({b}) then K % {S} else n({a})",
    "(n({a}) + K * n({b}) + 1) % {S}",
    "if n({a}) < n({b}) or n({b}) == K % {S} then n({b}) else (n({a}) + 1) % {S}",
)


def random_automaton(seed: int, max_cells: int = 5, max_states: int = 3) -> CellularAutomaton:
    """A small automaton over a free monoid with a random action and parameterized rules."""
    rng = random.Random(seed)
    gens = ("a", "b")[: rng.randint(1, 2)]
    n = rng.randint(2, max_cells)
    s = rng.randint(2, max_states)
    cells = [f"v{i}" for i in range(n)]
    action = {(c, g): rng.choice(cells) for c in cells for g in gens}
    words = ["ε"] + [".".join(rng.choice(gens) for _ in range(rng.randint(1, 2))) for _ in range(rng.randint(1, 2))]
    names = [f"n{j}" for j in range(len(words))]
    rules = {}
    for c in cells:
        a, b = rng.choice(names), rng.choice(names)
        rules[c] = rng.choice(_TEMPLATES).format(a=a, b=b, S=s)
    params = [rng.randrange(s) for _ in cells]
    return CellularAutomaton(free_monoid(*gens), cells, action, s, list(zip(names, words)), rules, params, base="v0")


def perturb(ca: CellularAutomaton, seed: int) -> CellularAutomaton:
    """Change one cell's output on one local configuration."""
    rng = random.Random(seed)
    x = rng.choice(ca.cells)
    i = ca.index[x]
    f = rng.choice(list(local_configs(ca, x)))
    cur = int(ca.tables[ca.rule_id[i], ca.local_index(f)])
    v = rng.choice([s for s in range(ca.state_count) if s != cur] or [cur])
    cond = " and ".join(f"n({nm}) == {fv}" for nm, fv in zip(ca.nbr_names, f))
    rules = list(ca.rules)
    rules[i] = f"if {cond} then {v} else ({rules[i]})"
    return ca.replace(rules=rules)


def trivial_action(n_cells: int = 2, states: int = 6) -> CellularAutomaton:
    """Every generator fixes every cell, so every local configuration is constant."""
    cells = [f"t{i}" for i in range(n_cells)]
    action = {(c, g): c for c in cells for g in ("p", "q")}
    nbhd = (("z", "ε"), ("p1", "p"), ("q1", "q"))
    return CellularAutomaton(free_monoid("p", "q"), cells, action, states, nbhd, "n(z)", base="t0")
