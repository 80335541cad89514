"""Cellular automata over finitely presented monoid actions.

An automaton stores its action as a generator table; arbitrary words act by
folding the table left to right, so ``act(x, u.v) == act(act(x, u), v)``.
Configurations are tuples (or 1-D integer arrays) of states in cell
declaration order. Local configurations are tuples of states in neighborhood
order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .common import NotClosed, NotOrbitInvariant, Verdict
from .monoid import EMPTY, MonoidPresentation, Word, parse_word
from .rulelang import RuleExpr, check_range, eval_rule, eval_rule_array, parse_rule, serialize, tabulate

# Above this many local configurations rules are evaluated from their
# expressions instead of being tabulated.
TABLE_CAP = 1 << 22
# Automata with at most this many cells step through the pure-Python path.
SMALL = 512


@dataclass(frozen=True)
class OrbitRelation:
    """Pairs of neighborhood names whose words reach the same cell."""

    pairs: frozenset[tuple[str, str]]
    classes: tuple[tuple[str, ...], ...]

    def related(self, a: str, b: str) -> bool:
        return (a, b) in self.pairs


class CellularAutomaton:
    def __init__(
        self,
        pres: MonoidPresentation,
        cells: Sequence[str],
        action,
        state_count: int,
        neighborhood: Sequence[tuple[str, Word | str]],
        rules,
        params=None,
        base: str | None = None,
    ):
        self.pres = pres
        self.cells = tuple(cells)
        self.index = {c: i for i, c in enumerate(self.cells)}
        if len(self.index) != len(self.cells):
            raise ValueError("duplicate cell name")
        self.state_count = int(state_count)
        self.neighborhood = tuple(
            (name, w if isinstance(w, Word) else parse_word(w, pres)) for name, w in neighborhood
        )
        self.nbr_names = tuple(n for n, _ in self.neighborhood)
        self.nbr_words = tuple(w for _, w in self.neighborhood)
        self.table = self._build_table(action)
        self.rules = self._build_rules(rules)
        self.params = self._build_params(params)
        if base is not None and base not in self.index:
            raise ValueError(f"base cell {base!r} is not a cell")
        self.base = base

    # -- construction helpers ------------------------------------------------

    def _build_table(self, action) -> np.ndarray:
        n, k = len(self.cells), len(self.pres.generators)
        if isinstance(action, np.ndarray):
            table = np.asarray(action, dtype=np.int64)
            if table.shape != (n, k):
                raise ValueError(f"action table must have shape {(n, k)}")
            return table
        table = np.full((n, k), -1, dtype=np.int64)
        for (cell, g), target in action.items():
            if target not in self.index:
                raise ValueError(f"action {cell}.{g} targets unknown cell {target!r}")
            table[self.index[cell], self.pres.index(g)] = self.index[target]
        return table

    def _build_rules(self, rules) -> tuple[RuleExpr, ...]:
        parsed: dict[str, RuleExpr] = {}

        def as_expr(r):
            if isinstance(r, RuleExpr):
                return r
            if r not in parsed:
                parsed[r] = parse_rule(r)
            return parsed[r]

        if isinstance(rules, (RuleExpr, str)):
            e = as_expr(rules)
            return (e,) * len(self.cells)
        if isinstance(rules, Mapping):
            default = rules.get("*")
            out = []
            for c in self.cells:
                r = rules.get(c, default)
                if r is None:
                    raise ValueError(f"no rule for cell {c!r}")
                out.append(as_expr(r))
            return tuple(out)
        rules = tuple(as_expr(r) for r in rules)
        if len(rules) != len(self.cells):
            raise ValueError("one rule per cell required")
        return rules

    def _build_params(self, params) -> np.ndarray:
        n = len(self.cells)
        if params is None:
            return np.zeros(n, dtype=np.int64)
        if isinstance(params, Mapping):
            out = np.zeros(n, dtype=np.int64)
            for c, v in params.items():
                out[self.index[c]] = int(v)
            return out
        out = np.asarray(params, dtype=np.int64)
        if out.shape != (n,):
            raise ValueError("one parameter per cell required")
        return out

    def replace(self, **changes) -> "CellularAutomaton":
        kw = dict(
            pres=self.pres,
            cells=self.cells,
            action=self.table,
            state_count=self.state_count,
            neighborhood=self.neighborhood,
            rules=self.rules,
            params=self.params,
            base=self.base,
        )
        kw.update(changes)
        return CellularAutomaton(**kw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CellularAutomaton):
            return NotImplemented
        return (
            self.pres == other.pres
            and self.cells == other.cells
            and np.array_equal(self.table, other.table)
            and self.state_count == other.state_count
            and self.neighborhood == other.neighborhood
            and self.rules == other.rules
            and np.array_equal(self.params, other.params)
            and self.base == other.base
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"CellularAutomaton({len(self.cells)} cells, generators={self.pres.generators}, "
            f"|S|={self.state_count}, N={[f'{n}={w}' for n, w in self.neighborhood]})"
        )

    # -- the action ------------------------------------------------------------

    def act_index(self, i: int, w: Sequence[str]) -> int:
        for g in w:
            i = int(self.table[i, self.pres.index(g)])
        return i

    def act_all(self, w: Sequence[str]) -> np.ndarray:
        """Where ``w`` sends every cell, as an index array."""
        idx = np.arange(len(self.cells), dtype=np.int64)
        for g in w:
            idx = self.table[idx, self.pres.index(g)]
        return idx

    def act(self, x: str, w: Word | str) -> str:
        if isinstance(w, str):
            w = parse_word(w, self.pres)
        return self.cells[self.act_index(self.index[x], w)]

    # -- compiled form ---------------------------------------------------------

    @cached_property
    def nbr(self) -> np.ndarray:
        # int32 halves the memory traffic of the step kernels on large automata
        if not self.neighborhood:
            return np.zeros((len(self.cells), 0), dtype=np.int32)
        return np.ascontiguousarray(np.stack([self.act_all(w) for w in self.nbr_words], axis=1), dtype=np.int32)

    @cached_property
    def _rule_groups(self):
        """(unique (expr, K) list, per-cell group id)."""
        expr_ids: dict[int, int] = {}
        exprs: list[RuleExpr] = []
        merged: dict[RuleExpr, int] = {}
        per_cell = np.empty(len(self.cells), dtype=np.int64)
        for i, e in enumerate(self.rules):
            j = expr_ids.get(id(e))
            if j is None:
                j = merged.get(e)
                if j is None:
                    j = merged[e] = len(exprs)
                    exprs.append(e)
                expr_ids[id(e)] = j
            per_cell[i] = j
        kmin = int(self.params.min()) if len(self.params) else 0
        span = (int(self.params.max()) - kmin + 1) if len(self.params) else 1
        keys = per_cell * span + (self.params - kmin)
        uniq, rule_id = np.unique(keys, return_inverse=True)
        groups = [(exprs[int(k // span)], int(k % span) + kmin) for k in uniq]
        return groups, rule_id.astype(np.int32)

    @property
    def rule_groups(self) -> list[tuple[RuleExpr, int]]:
        return self._rule_groups[0]

    @property
    def rule_id(self) -> np.ndarray:
        return self._rule_groups[1]

    @property
    def tabulated(self) -> bool:
        return self.state_count ** len(self.neighborhood) <= TABLE_CAP

    @cached_property
    def tables(self) -> np.ndarray:
        if not self.tabulated:
            raise ValueError("local configuration space too large to tabulate")
        return np.stack(
            [tabulate(e, self.nbr_names, self.state_count, K) for e, K in self.rule_groups]
        )

    @cached_property
    def _py_step_data(self):
        nbr = [tuple(int(v) for v in row) for row in self.nbr]
        rows = [list(map(int, t)) for t in self.tables]
        return nbr, [rows[int(r)] for r in self.rule_id]

    # -- local configurations --------------------------------------------------

    def configuration(self, c) -> tuple[int, ...]:
        """Normalize a mapping or sequence to a state tuple, checking the range."""
        if isinstance(c, Mapping):
            missing = set(self.cells) - set(c)
            if missing:
                raise ValueError(f"configuration misses cells {sorted(missing)}")
            out = tuple(int(c[x]) for x in self.cells)
        else:
            out = tuple(int(v) for v in c)
            if len(out) != len(self.cells):
                raise ValueError(f"configuration needs {len(self.cells)} states, got {len(out)}")
        for v in out:
            if not 0 <= v < self.state_count:
                raise ValueError(f"state {v} outside 0..{self.state_count - 1}")
        return out

    def local(self, f) -> tuple[int, ...]:
        if isinstance(f, Mapping):
            return tuple(int(f[n]) for n in self.nbr_names)
        f = tuple(int(v) for v in f)
        if len(f) != len(self.neighborhood):
            raise ValueError("local configuration must assign every neighborhood name")
        return f

    def local_index(self, f: Sequence[int]) -> int:
        idx = 0
        for v in f:
            idx = idx * self.state_count + v
        return idx


# -- operations ----------------------------------------------------------------


def validate(ca: CellularAutomaton) -> Verdict:
    if ca.state_count < 1:
        return Verdict.failed("state count must be at least 1")
    if len(set(ca.nbr_names)) != len(ca.nbr_names):
        return Verdict.failed("duplicate neighborhood name")
    missing = np.argwhere(ca.table < 0)
    if len(missing):
        i, g = missing[0]
        return Verdict.failed(
            f"action undefined at {ca.cells[i]}.{ca.pres.generators[g]}",
            cell=ca.cells[i],
            generator=ca.pres.generators[g],
        )
    for u, v in ca.pres.relations:
        au, av = ca.act_all(u), ca.act_all(v)
        bad = np.flatnonzero(au != av)
        if len(bad):
            i = int(bad[0])
            return Verdict.failed(
                f"relation {u}=={v} fails at {ca.cells[i]}: {ca.cells[au[i]]} != {ca.cells[av[i]]}",
                relation=(u, v),
                cell=ca.cells[i],
                reached=(ca.cells[au[i]], ca.cells[av[i]]),
            )
    for e, K in ca.rule_groups:
        v = check_range(e, ca.nbr_names, ca.state_count, K)
        if not v.ok:
            cell = ca.cells[int(np.flatnonzero(ca.rule_id == ca.rule_groups.index((e, K)))[0])]
            return Verdict.failed(f"rule of {cell}: {v.reason}", cell=cell, rule=serialize(e), **v.witness)
    return Verdict.passed()


def act(ca: CellularAutomaton, x: str, w: Word | str) -> str:
    return ca.act(x, w)


def orbit_relation(ca: CellularAutomaton, x: str) -> OrbitRelation:
    i = ca.index[x]
    reached = [ca.act_index(i, w) for w in ca.nbr_words]
    groups: dict[int, list[str]] = {}
    for name, r in zip(ca.nbr_names, reached):
        groups.setdefault(r, []).append(name)
    classes = tuple(tuple(g) for g in groups.values())
    pairs = frozenset((a, b) for g in classes for a in g for b in g)
    return OrbitRelation(pairs, classes)


def _class_index(ca: CellularAutomaton, x: str) -> list[int]:
    """For each neighborhood position, the number of its orbit class."""
    i = ca.index[x]
    seen: dict[int, int] = {}
    return [seen.setdefault(ca.act_index(i, w), len(seen)) for w in ca.nbr_words]


def is_orbit_invariant(ca: CellularAutomaton, x: str, f) -> bool:
    f = ca.local(f)
    first: dict[int, int] = {}
    for cls, v in zip(_class_index(ca, x), f):
        if first.setdefault(cls, v) != v:
            return False
    return True


def local_configs(ca: CellularAutomaton, x: str) -> Iterator[tuple[int, ...]]:
    """Every orbit-invariant local configuration at ``x``, lexicographic over classes."""
    import itertools

    cls = _class_index(ca, x)
    n_classes = len(set(cls))
    for vals in itertools.product(range(ca.state_count), repeat=n_classes):
        yield tuple(vals[k] for k in cls)


def local_view(ca: CellularAutomaton, x: str, c) -> tuple[int, ...]:
    i = ca.index[x]
    return tuple(int(c[j]) for j in ca.nbr[i])


def evaluation_map(ca: CellularAutomaton, x: str, f) -> int:
    f = ca.local(f)
    if not is_orbit_invariant(ca, x, f):
        raise NotOrbitInvariant(f"{f} is not orbit-invariant at {x}")
    i = ca.index[x]
    if ca.tabulated:
        return int(ca.tables[ca.rule_id[i], ca.local_index(f)])
    return eval_rule(ca.rules[i], dict(zip(ca.nbr_names, f)), int(ca.params[i]))


def _step_by_expr(ca: CellularAutomaton, states: np.ndarray) -> np.ndarray:
    out = np.empty(len(states), dtype=np.int64)
    for gid, (e, K) in enumerate(ca.rule_groups):
        idx = np.flatnonzero(ca.rule_id == gid)
        env = {name: states[ca.nbr[idx, j]] for j, name in enumerate(ca.nbr_names)}
        out[idx] = eval_rule_array(e, env, K)
    return out


def step_array(ca: CellularAutomaton, states: np.ndarray, backend: str | None = None) -> np.ndarray:
    states = np.ascontiguousarray(states, dtype=np.int64)
    if not ca.tabulated:
        return _step_by_expr(ca, states)
    step, _, _ = kernels.kernels(backend)
    return step(states, ca.nbr, ca.rule_id, ca.tables, ca.state_count)


def step_batch(ca: CellularAutomaton, batch: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Apply the global rule to every row of a ``(b, n_cells)`` array."""
    batch = np.ascontiguousarray(batch, dtype=np.int64)
    if not ca.tabulated:
        return np.stack([_step_by_expr(ca, row) for row in batch])
    _, step, _ = kernels.kernels(backend)
    return step(batch, ca.nbr, ca.rule_id, ca.tables, ca.state_count)


def _step_tuple(ca: CellularAutomaton, c: tuple[int, ...]) -> tuple[int, ...]:
    if len(c) > SMALL or not ca.tabulated:
        return tuple(int(v) for v in step_array(ca, np.asarray(c)))
    s = ca.state_count
    nbr, tabs = ca._py_step_data
    out = []
    for nb, tab in zip(nbr, tabs):
        idx = 0
        for j in nb:
            idx = idx * s + c[j]
        out.append(tab[idx])
    return tuple(out)


def global_step(ca: CellularAutomaton, c):
    """Synchronous update; tuples in give tuples out, arrays give arrays."""
    if isinstance(c, np.ndarray):
        if c.shape != (len(ca.cells),):
            raise ValueError(f"configuration needs shape ({len(ca.cells)},), got {c.shape}")
        if len(c) and (c.min() < 0 or c.max() >= ca.state_count):
            raise ValueError(f"states outside 0..{ca.state_count - 1}")
        return step_array(ca, c)
    return _step_tuple(ca, ca.configuration(c))


def evolve(ca: CellularAutomaton, c, steps: int) -> list:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if isinstance(c, Mapping):
        c = ca.configuration(c)
    out = [c if isinstance(c, np.ndarray) else tuple(c)]
    for _ in range(steps):
        out.append(global_step(ca, out[-1]))
    return out


def evolve_array(ca: CellularAutomaton, states: np.ndarray, steps: int, backend: str | None = None) -> np.ndarray:
    """Final configuration after ``steps`` updates, looping inside the kernel."""
    states = np.ascontiguousarray(states, dtype=np.int64)
    if not ca.tabulated:
        for _ in range(steps):
            states = _step_by_expr(ca, states)
        return states
    _, _, ev = kernels.kernels(backend)
    return ev(states, ca.nbr, ca.rule_id, ca.tables, ca.state_count, steps)


def reachable_set(ca: CellularAutomaton, x: str) -> tuple[frozenset[str], dict[str, Word]]:
    witness = {x: EMPTY}
    queue = deque([x])
    while queue:
        cur = queue.popleft()
        i = ca.index[cur]
        for gi, g in enumerate(ca.pres.generators):
            nxt = ca.cells[int(ca.table[i, gi])]
            if nxt not in witness:
                witness[nxt] = witness[cur] + (g,)
                queue.append(nxt)
    return frozenset(witness), witness


def is_reachable(ca: CellularAutomaton, x: str) -> bool:
    return len(reachable_set(ca, x)[0]) == len(ca.cells)


def restrict_to(ca: CellularAutomaton, subset) -> CellularAutomaton:
    keep = set(subset)
    unknown = keep - set(ca.cells)
    if unknown:
        raise ValueError(f"unknown cells {sorted(unknown)}")
    cells = [c for c in ca.cells if c in keep]
    action = {}
    for c in cells:
        i = ca.index[c]
        for gi, g in enumerate(ca.pres.generators):
            t = ca.cells[int(ca.table[i, gi])]
            if t not in keep:
                raise NotClosed(c, g)
            action[(c, g)] = t
    return CellularAutomaton(
        ca.pres,
        cells,
        action,
        ca.state_count,
        ca.neighborhood,
        {c: ca.rules[ca.index[c]] for c in cells},
        {c: int(ca.params[ca.index[c]]) for c in cells},
        ca.base if ca.base in keep else None,
    )
