"""Exact whole-space analyses: quiescence, fixed points, periodicity, nilpotency, one-wayness."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .automaton import CellularAutomaton, evolve, step_batch
from .common import DEFAULT_CAP, CapExceeded, Verdict
from .monoid import IdentityVerdict, Word, reduce_bounded, words_identity_bounded


@dataclass
class AnalysisReport:
    kind: str
    verdict: bool
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def plain(v):
            if isinstance(v, Word):
                return str(v)
            if isinstance(v, (set, frozenset)):
                return sorted(plain(x) for x in v)
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            if isinstance(v, dict):
                return {str(k): plain(x) for k, x in v.items()}
            if isinstance(v, np.integer):
                return int(v)
            return v

        return json.dumps(plain(asdict(self)), sort_keys=True)

    def render(self) -> str:
        lines = [f"{self.kind}: {'yes' if self.verdict else 'no'}"]
        for k, v in self.witnesses.items():
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def quiescent_states(ca: CellularAutomaton) -> set[int]:
    out = set()
    for q in range(ca.state_count):
        f = (q,) * len(ca.nbr_words)
        j = ca.local_index(f)
        if np.all(ca.tables[ca.rule_id, j] == q):
            out.add(q)
    return out


def successors(ca: CellularAutomaton, cap: int = DEFAULT_CAP, chunk: int = 1 << 16) -> np.ndarray:
    """Code of G(c) for every configuration code c (first cell most significant)."""
    n, s = len(ca.cells), ca.state_count
    size = s**n
    if size > cap:
        raise CapExceeded(size, cap)
    succ = np.empty(size, dtype=np.int64)
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        batch = kernels.decode(np.arange(lo, hi, dtype=np.int64), n, s)
        succ[lo:hi] = kernels.encode(step_batch(ca, batch), s)
    return succ


def _decode1(ca: CellularAutomaton, code: int) -> tuple[int, ...]:
    return tuple(int(v) for v in kernels.decode(np.array([code]), len(ca.cells), ca.state_count)[0])


def fixed_points(ca: CellularAutomaton, cap: int = DEFAULT_CAP) -> set[tuple[int, ...]]:
    succ = successors(ca, cap)
    codes = np.flatnonzero(succ == np.arange(len(succ)))
    return {_decode1(ca, int(c)) for c in codes}


def periodicity(ca: CellularAutomaton, cap: int = DEFAULT_CAP) -> int | None:
    """Least p >= 1 with G^p the identity, or None when G is not a bijection."""
    succ = successors(ca, cap)
    if len(np.unique(succ)) != len(succ):
        return None
    seen = np.zeros(len(succ), dtype=bool)
    p = 1
    for start in range(len(succ)):
        if seen[start]:
            continue
        length, c = 0, start
        while not seen[c]:
            seen[c] = True
            c = succ[c]
            length += 1
        p = math.lcm(p, length)
    return p


def nilpotency(ca: CellularAutomaton, cap: int = DEFAULT_CAP) -> tuple[int, tuple[int, ...]] | None:
    """Least t with G^t constant, together with that constant fixed point."""
    succ = successors(ca, cap)
    image = np.arange(len(succ), dtype=np.int64)
    t = 0
    while True:
        if len(image) == 1:
            c = int(image[0])
            return (t, _decode1(ca, c)) if succ[c] == c else None
        nxt = np.unique(succ[image])
        if len(nxt) == len(image):
            # the images shrink monotonically; equal size means they stopped
            return None
        image, t = nxt, t + 1


def one_way_bounded(ca: CellularAutomaton, L: int) -> Verdict:
    """Look for a cell fixed by a non-trivial word of length at most ``L``."""
    if L < 1:
        raise ValueError("L must be at least 1")
    found = []
    gens = ca.pres.generators
    for length in range(1, L + 1):
        for letters in itertools.product(gens, repeat=length):
            w = Word(letters)
            back = np.flatnonzero(ca.act_all(w) == np.arange(len(ca.cells)))
            if not len(back):
                continue
            if reduce_bounded(ca.pres, w, L) == Word() or words_identity_bounded(ca.pres, w, L) == IdentityVerdict.IDENTITY:
                continue
            found.extend((ca.cells[int(i)], w) for i in back)
    found.sort(key=lambda p: (ca.index[p[0]], len(p[1]), [ca.pres.index(g) for g in p[1]]))
    if found:
        x, w = found[0]
        return Verdict.failed(f"{x} is fixed by {w}", cell=x, word=w, witnesses=found, bound=L)
    return Verdict.passed(f"one-way up to length {L}", bound=L)


def trajectory_table(ca: CellularAutomaton, c, steps: int) -> str:
    rows = evolve(ca, ca.configuration(c), steps)
    header = ["step", *ca.cells]
    body = [[str(t), *map(str, row)] for t, row in enumerate(rows)]
    widths = [max(len(r[j]) for r in [header, *body]) for j in range(len(header))]
    return "\n".join(" ".join(v.rjust(w) for v, w in zip(r, widths)) for r in [header, *body]) + "\n"


def analyze(ca: CellularAutomaton, kind: str, cap: int = DEFAULT_CAP, L: int = 4) -> AnalysisReport:
    if kind == "quiescent":
        qs = quiescent_states(ca)
        return AnalysisReport(kind, bool(qs), {"states": sorted(qs)})
    if kind == "fixed-points":
        fps = sorted(fixed_points(ca, cap))
        return AnalysisReport(kind, bool(fps), {"count": len(fps), "configurations": fps})
    if kind == "periodic":
        p = periodicity(ca, cap)
        return AnalysisReport(kind, p is not None, {"period": p})
    if kind == "nilpotent":
        r = nilpotency(ca, cap)
        w = {"t": r[0], "configuration": r[1]} if r else {}
        return AnalysisReport(kind, r is not None, w)
    if kind == "one-way":
        v = one_way_bounded(ca, L)
        w = {"bound": L}
        if not v.ok:
            w |= {
                "cell": v.witness["cell"],
                "word": v.witness["word"],
                "all": [f"{x}:{m}" for x, m in v.witness["witnesses"]],
            }
        return AnalysisReport(kind, v.ok, w)
    raise ValueError(f"unknown analysis {kind!r}")
