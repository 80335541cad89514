"""Cellular morphisms, sections, bisimulations and logical transports.

Two automata are *compatible* when they share the presentation, the
neighborhood words (in order) and the state count; local configurations of
one can then be fed to the rules of the other.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from . import kernels
from .automaton import CellularAutomaton, global_step, local_configs, reachable_set
from .common import (
    CapExceeded,
    Exhaustive,
    IncompatibleSignatures,
    LiftImpossible,
    MCAError,
    Mode,
    NotReachable,
    Sample,
    Verdict,
)
from .logic import And, Atom, Formula, ModelChecker, Next, Space, probe_config_formula, random_formula
from .monoid import EMPTY, Word


@dataclass(frozen=True)
class Copy:
    source: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass
class CellMapSpec:
    mapping: dict[str, str]

    def __call__(self, x: str) -> str:
        return self.mapping[x]


@dataclass
class SectionSpec:
    """Per target cell: copy the state of a source cell, or a constant."""

    directives: dict[str, Copy | Const]


TransportSpec = SectionSpec


@dataclass
class BisimulationWitness:
    pairs: tuple[tuple[str, str], ...]
    base_pair: tuple[str, str] | None = None
    words: dict[tuple[str, str], Word] = field(default_factory=dict)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in set(self.pairs)


@dataclass
class BisimulationFailure:
    """A reachable pair whose rules disagree on a shared local configuration."""

    word: Word
    pair: tuple[str, str]
    local_config: tuple[int, ...]
    outputs: tuple[int, int]


@dataclass
class TransportFailure:
    stage: str
    reason: str
    detail: dict = field(default_factory=dict)


class VerificationFailed(MCAError):
    pass


def _require_compatible(g: CellularAutomaton, d: CellularAutomaton) -> None:
    if g.pres != d.pres:
        raise IncompatibleSignatures("automata are over different presentations")
    if g.nbr_words != d.nbr_words:
        raise IncompatibleSignatures("automata have different neighborhood words")
    if g.state_count != d.state_count:
        raise IncompatibleSignatures("automata have different state counts")


def _output(ca: CellularAutomaton, i: int, f: tuple[int, ...]) -> int:
    return int(ca.tables[ca.rule_id[i], ca.local_index(f)])


def _as_map(f) -> dict[str, str]:
    return dict(f.mapping if isinstance(f, CellMapSpec) else f)


# -- morphisms ---------------------------------------------------------------


def check_pre_morphism(g: CellularAutomaton, d: CellularAutomaton, f) -> Verdict:
    _require_compatible(g, d)
    fmap = _as_map(f)
    missing = [x for x in g.cells if x not in fmap]
    if missing:
        return Verdict.failed(f"map undefined on {missing[0]}", cell=missing[0])
    for x, y in fmap.items():
        if x not in g.index or y not in d.index:
            return Verdict.failed(f"map entry {x} -> {y} names an unknown cell", cell=x)
    fi = np.array([d.index[fmap[x]] for x in g.cells], dtype=np.int64)
    for gi, gen in enumerate(g.pres.generators):
        lhs = fi[g.table[:, gi]]
        rhs = d.table[fi, gi]
        bad = np.flatnonzero(lhs != rhs)
        if len(bad):
            x = g.cells[int(bad[0])]
            return Verdict.failed(
                f"not equivariant: f({x}.{gen}) = {d.cells[lhs[bad[0]]]} but f({x}).{gen} = {d.cells[rhs[bad[0]]]}",
                stage="equivariance",
                cell=x,
                generator=gen,
            )
    for i, x in enumerate(g.cells):
        y = fmap[x]
        j = d.index[y]
        for h in local_configs(d, y):
            a, b = _output(g, i, h), _output(d, j, h)
            if a != b:
                return Verdict.failed(
                    f"rules disagree at {x} -> {y} on {h}: {a} != {b}",
                    stage="rules",
                    cell=x,
                    local_config=h,
                    outputs=(a, b),
                )
    return Verdict.passed()


def _compile_section(s: SectionSpec, src: CellularAutomaton, dst: CellularAutomaton):
    copy = np.full(len(dst.cells), -1, dtype=np.int64)
    const = np.zeros(len(dst.cells), dtype=np.int64)
    for y in dst.cells:
        if y not in s.directives:
            raise ValueError(f"section has no directive for target cell {y!r}")
    for y, dv in s.directives.items():
        if y not in dst.index:
            raise ValueError(f"section names unknown target cell {y!r}")
        j = dst.index[y]
        if isinstance(dv, Copy):
            if dv.source not in src.index:
                raise ValueError(f"section copies from unknown cell {dv.source!r}")
            copy[j] = src.index[dv.source]
        else:
            if not 0 <= dv.value < dst.state_count:
                raise ValueError(f"constant {dv.value} out of range")
            const[j] = dv.value
    return copy, const


def pushforward(s: SectionSpec, c, source: CellularAutomaton | None = None, target: CellularAutomaton | None = None):
    """Apply a section to a configuration.

    With both automata given, ``c`` is a state tuple of ``source`` and a tuple
    for ``target`` is returned; otherwise ``c`` maps cells to states and a
    dict over the directive targets is returned. A 2-d array of source rows
    is pushed forward row by row into a 2-d array.
    """
    if source is None or target is None:
        return {
            y: (c[dv.source] if isinstance(dv, Copy) else dv.value) for y, dv in s.directives.items()
        }
    copy, const = _compile_section(s, source, target)
    if isinstance(c, np.ndarray) and c.ndim == 2:
        return _push_batch(c, copy, const)
    c = tuple(c)
    return tuple(c[k] if k >= 0 else int(v) for k, v in zip(copy, const))


def _push_batch(batch: np.ndarray, copy: np.ndarray, const: np.ndarray) -> np.ndarray:
    out = np.broadcast_to(const, (len(batch), len(const))).copy()
    sel = copy >= 0
    out[:, sel] = batch[:, copy[sel]]
    return out


def config_batches(ca: CellularAutomaton, mode: Mode, chunk: int = 65536) -> Iterator[np.ndarray]:
    """Configurations of ``ca`` as arrays of rows, in the order of ``iter_configurations``."""
    n, s = len(ca.cells), ca.state_count
    if isinstance(mode, Exhaustive):
        size = s**n
        if size > mode.cap:
            raise CapExceeded(size, mode.cap)
        for lo in range(0, size, chunk):
            yield kernels.decode(np.arange(lo, min(size, lo + chunk), dtype=np.int64), n, s)
    else:
        rng = random.Random(mode.seed)
        rows = [[rng.randrange(s) for _ in range(n)] for _ in range(mode.n)]
        for lo in range(0, len(rows), chunk):
            yield np.array(rows[lo : lo + chunk], dtype=np.int64).reshape(-1, n)


def check_section(g: CellularAutomaton, d: CellularAutomaton, f, s: SectionSpec, mode: Mode = Exhaustive()) -> Verdict:
    """Verify that pulling back along ``f`` undoes pushing forward along ``s``."""
    fmap = _as_map(f)
    try:
        copy, const = _compile_section(s, g, d)
    except ValueError as exc:
        return Verdict.failed(str(exc), stage="section")
    fi = np.array([d.index[fmap[x]] for x in g.cells], dtype=np.int64)
    checked = 0
    for batch in config_batches(g, mode):
        pulled = _push_batch(batch, copy, const)[:, fi]
        bad = np.flatnonzero(np.any(pulled != batch, axis=1))
        if len(bad):
            c = tuple(int(v) for v in batch[bad[0]])
            return Verdict.failed("pullback of the pushforward differs", stage="section", counterexample=c)
        checked += len(batch)
    return Verdict.passed(f"section law holds on {checked} configurations", checked=checked)


def check_cellular_morphism(
    g: CellularAutomaton,
    x0: str,
    d: CellularAutomaton,
    y0: str,
    f,
    s: SectionSpec,
    mode: Mode = Exhaustive(),
    naturality_samples: int = 64,
) -> Verdict:
    v = check_pre_morphism(g, d, f)
    if not v.ok:
        v.witness.setdefault("stage", "pre-morphism")
        return v
    v = check_section(g, d, f, s, mode)
    if not v.ok:
        return v
    fmap = _as_map(f)
    if fmap[x0] != y0:
        return Verdict.failed(f"base point maps to {fmap[x0]}, not {y0}", stage="base")
    # global rules commute with pullback after pushforward
    copy, const = _compile_section(s, g, d)
    fi = np.array([d.index[fmap[x]] for x in g.cells], dtype=np.int64)
    seed = mode.seed if isinstance(mode, Sample) else 0
    from .automaton import step_batch

    for batch in config_batches(g, Sample(naturality_samples, seed)):
        lhs = step_batch(d, _push_batch(batch, copy, const))[:, fi]
        rhs = step_batch(g, batch)
        bad = np.flatnonzero(np.any(lhs != rhs, axis=1))
        if len(bad):
            c = tuple(int(v) for v in batch[bad[0]])
            return Verdict.failed("global rules not natural", stage="naturality", counterexample=c)
    return Verdict.passed()


def graph_bisim_from_morphism(g: CellularAutomaton, d: CellularAutomaton, f) -> BisimulationWitness:
    fmap = _as_map(f)
    return BisimulationWitness(tuple((x, fmap[x]) for x in g.cells))


def compose(f, h) -> CellMapSpec:
    """``h`` after ``f``."""
    fm, hm = _as_map(f), _as_map(h)
    return CellMapSpec({x: hm[y] for x, y in fm.items()})


# -- bisimulations -------------------------------------------------------------


def shared_local_configs(g: CellularAutomaton, x: str, d: CellularAutomaton, y: str) -> Iterator[tuple[int, ...]]:
    """Local configurations orbit-invariant at both ``x`` in ``g`` and ``y`` in ``d``."""
    import itertools

    k = len(g.nbr_words)
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ca, cell in ((g, x), (d, y)):
        row = ca.nbr[ca.index[cell]]
        first: dict[int, int] = {}
        for pos, target in enumerate(row):
            other = first.setdefault(int(target), pos)
            parent[find(pos)] = find(other)
    roots = [find(p) for p in range(k)]
    order = list(dict.fromkeys(roots))
    cls = [order.index(r) for r in roots]
    for vals in itertools.product(range(g.state_count), repeat=len(order)):
        yield tuple(vals[c] for c in cls)


def _rule_clash(g, x, d, y):
    i, j = g.index[x], d.index[y]
    for f in shared_local_configs(g, x, d, y):
        a, b = _output(g, i, f), _output(d, j, f)
        if a != b:
            return f, (a, b)
    return None


def check_bisimulation(g: CellularAutomaton, d: CellularAutomaton, w: BisimulationWitness) -> Verdict:
    _require_compatible(g, d)
    pairs = set(w.pairs)
    for x, y in w.pairs:
        if x not in g.index or y not in d.index:
            return Verdict.failed(f"pair ({x}, {y}) names an unknown cell", pair=(x, y))
    for gi, gen in enumerate(g.pres.generators):
        for x, y in w.pairs:
            nxt = (g.cells[g.table[g.index[x], gi]], d.cells[d.table[d.index[y], gi]])
            if nxt not in pairs:
                return Verdict.failed(
                    f"pairs not closed: ({x}, {y}).{gen} = {nxt}", stage="closure", pair=(x, y), generator=gen
                )
    for x, y in w.pairs:
        clash = _rule_clash(g, x, d, y)
        if clash:
            f, outs = clash
            return Verdict.failed(
                f"rules of ({x}, {y}) differ on {f}: {outs[0]} != {outs[1]}",
                stage="rules",
                pair=(x, y),
                local_config=f,
                outputs=outs,
            )
    return Verdict.passed()


class ConsistentConfigs:
    """Pairs of configurations agreeing on every related pair of cells."""

    def __init__(self, g: CellularAutomaton, d: CellularAutomaton, w: BisimulationWitness):
        self.g, self.d, self.w = g, d, w
        self._idx = [(g.index[x], d.index[y]) for x, y in w.pairs]

    def member(self, c, d) -> bool:
        return all(c[i] == d[j] for i, j in self._idx)

    def __contains__(self, pair) -> bool:
        return self.member(*pair)

    def step(self, c, d):
        return global_step(self.g, tuple(c)), global_step(self.d, tuple(d))


def consistent_configs(g: CellularAutomaton, d: CellularAutomaton, w: BisimulationWitness) -> ConsistentConfigs:
    return ConsistentConfigs(g, d, w)


def build_bisimulation(g: CellularAutomaton, x0: str, d: CellularAutomaton, y0: str):
    """Close ``(x0, y0)`` under the generators, checking rules at each reached pair.

    Returns a :class:`BisimulationWitness`, or the first
    :class:`BisimulationFailure` in breadth-first order.
    """
    _require_compatible(g, d)
    start = (x0, y0)
    words = {start: EMPTY}
    queue = deque([start])
    order = []
    while queue:
        pair = queue.popleft()
        order.append(pair)
        clash = _rule_clash(g, pair[0], d, pair[1])
        if clash:
            return BisimulationFailure(words[pair], pair, clash[0], clash[1])
        i, j = g.index[pair[0]], d.index[pair[1]]
        for gi, gen in enumerate(g.pres.generators):
            nxt = (g.cells[g.table[i, gi]], d.cells[d.table[j, gi]])
            if nxt not in words:
                words[nxt] = words[pair] + (gen,)
                queue.append(nxt)
    return BisimulationWitness(tuple(order), start, words)


def _lift(ca: CellularAutomaton, cell: str, f: tuple[int, ...]) -> tuple[int, ...]:
    c = [0] * len(ca.cells)
    assigned: dict[int, int] = {}
    for target, v in zip(ca.nbr[ca.index[cell]], f):
        t = int(target)
        if assigned.setdefault(t, v) != v:
            raise LiftImpossible(f"{f} is not orbit-invariant at {cell}")
        c[t] = v
    return tuple(c)


def distinguishing_formula(
    g: CellularAutomaton, x0: str, d: CellularAutomaton, y0: str, fw: BisimulationFailure
) -> tuple[Formula, tuple[int, ...], tuple[int, ...]]:
    """A formula true at ``(g, x0, c_g)`` and false at ``(d, y0, c_d)``, checked before returning."""
    x, y = g.act(x0, fw.word), d.act(y0, fw.word)
    if (x, y) != tuple(fw.pair):
        raise LiftImpossible(f"word {fw.word} reaches ({x}, {y}), not {fw.pair}")
    f = tuple(fw.local_config)
    c_g, c_d = _lift(g, x, f), _lift(d, y, f)
    probe = probe_config_formula(g, x, f)
    parts = probe.args if isinstance(probe, And) else (probe,)
    body = And((*parts, Next(Atom(fw.outputs[0]))))
    phi = body if fw.word == EMPTY else Space(Word(fw.word), body)
    if not ModelChecker(g).check(x0, c_g, phi) or ModelChecker(d).check(y0, c_d, phi):
        raise VerificationFailed(f"{phi} does not separate the automata; the failure witness is stale")
    return phi, c_g, c_d


# -- logical transports --------------------------------------------------------


def check_logical_transport(
    g: CellularAutomaton,
    x0: str,
    d: CellularAutomaton,
    y0: str,
    t: SectionSpec,
    depth: int,
    samples: int,
    seed: int,
) -> Verdict:
    """Compare random bounded formulas on random configurations and their transports."""
    copy, const = _compile_section(t, g, d)
    rng = random.Random(seed)
    mg, md = ModelChecker(g), ModelChecker(d)
    for k in range(samples):
        phi = random_formula(rng.randrange(2**31), depth, g)
        c = tuple(rng.randrange(g.state_count) for _ in g.cells)
        tc = tuple(c[i] if i >= 0 else int(v) for i, v in zip(copy, const))
        a, b = mg.check(x0, c, phi), md.check(y0, tc, phi)
        if a != b:
            return Verdict.failed(
                f"{phi} is {a} at {x0} but {b} at {y0}", formula=phi, configuration=c, sample=k
            )
    return Verdict.passed(f"{samples} samples agree", samples=samples)


def morphism_from_transport(
    g: CellularAutomaton,
    x0: str,
    d: CellularAutomaton,
    y0: str,
    t: SectionSpec,
    depth: int = 3,
    samples: int = 100,
    seed: int = 0,
    mode: Mode = Exhaustive(),
):
    """Recover the based cell map induced by a transport.

    Each cell reached from ``x0`` by a shortest word ``m`` is sent to the cell
    reached from ``y0`` by ``m``. Returns a :class:`CellMapSpec` when the map
    is well defined and forms a cellular morphism with ``t``; otherwise a
    :class:`TransportFailure`.
    """
    _require_compatible(g, d)
    reach, _ = reachable_set(g, x0)
    if len(reach) != len(g.cells):
        missing = [c for c in g.cells if c not in reach]
        raise NotReachable(f"{missing[0]} is not reachable from {x0}")
    fmap = {x0: y0}
    words = {x0: EMPTY}
    queue = deque([x0])
    while queue:
        x = queue.popleft()
        i, j = g.index[x], d.index[fmap[x]]
        for gi, gen in enumerate(g.pres.generators):
            x2, y2 = g.cells[g.table[i, gi]], d.cells[d.table[j, gi]]
            if x2 not in fmap:
                fmap[x2] = y2
                words[x2] = words[x] + (gen,)
                queue.append(x2)
            elif fmap[x2] != y2:
                return TransportFailure(
                    "well-defined",
                    f"{x2} is reached by {words[x2]} and {words[x] + (gen,)} with targets {fmap[x2]} and {y2}",
                    {"words": (words[x2], words[x] + (gen,)), "cell": x2, "targets": (fmap[x2], y2)},
                )
    f = CellMapSpec({x: fmap[x] for x in g.cells})
    v = check_logical_transport(g, x0, d, y0, t, depth, samples, seed)
    if not v.ok:
        return TransportFailure("transport", v.reason, v.witness)
    v = check_cellular_morphism(g, x0, d, y0, f, t, mode)
    if not v.ok:
        return TransportFailure(v.witness.get("stage", "morphism"), v.reason, v.witness)
    return f
