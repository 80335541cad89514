"""``mca`` command line.

Exit codes: 0 pass / true, 1 fail / false / distinguished, 2 usage, parse or
validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, equivalence, io
from .automaton import evolve, local_configs, orbit_relation, validate
from .common import DEFAULT_CAP, Exhaustive, MCAError, Sample, ValidationFailed
from .logic import ModelChecker, parse_formula, serialize, valid


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _config(arg: str, ca):
    text = _read(arg) if Path(arg).is_file() else arg
    return io.parse_configuration(text, ca)


def _cell(ca, name: str) -> str:
    if name not in ca.index:
        raise UsageError(f"unknown cell {name!r}")
    return name


def _base(arg: str | None, g, d) -> tuple[str, str]:
    if arg is None:
        if g.base is None or d.base is None:
            raise UsageError("--base x:y is required when a file declares no base cell")
        return g.base, d.base
    if arg.count(":") != 1:
        raise UsageError("--base takes the form x:y")
    x, y = arg.split(":")
    return _cell(g, x), _cell(d, y)


def _fmt(c) -> str:
    return ",".join(map(str, c))


def _mode(a):
    if a.sample is None:
        return Exhaustive(a.cap)
    if a.seed is None:
        raise UsageError("--sample needs --seed")
    return Sample(a.sample, a.seed)


def cmd_validate(a, out) -> int:
    ca = io.load_automaton(a.file, check=False)
    v = validate(ca)
    if v.ok:
        print(f"ok: {len(ca.cells)} cells, {ca.state_count} states", file=out)
        return 0
    print(f"invalid: {v.reason}", file=out)
    for k, w in v.witness.items():
        print(f"  {k}: {w}", file=out)
    return 1


def cmd_evolve(a, out) -> int:
    ca = io.load_automaton(a.file)
    c = _config(a.config, ca)
    if a.format == "json":
        rows = evolve(ca, c, a.steps)
        print(json.dumps({"cells": list(ca.cells), "rows": [list(r) for r in rows]}), file=out)
    else:
        out.write(analysis.trajectory_table(ca, c, a.steps))
    return 0


def cmd_check(a, out) -> int:
    ca = io.load_automaton(a.file)
    x = _cell(ca, a.cell or ca.base or "")
    phi = parse_formula(a.formula, ca.pres)
    if a.valid:
        v = valid(ca, x, phi, _mode(a))
        if v.ok:
            print(f"valid at {x}: {serialize(phi)}", file=out)
            return 0
        print(f"not valid at {x}: counterexample {_fmt(v.witness['counterexample'])}", file=out)
        return 1
    if a.config is None:
        raise UsageError("check needs --config or --valid")
    c = _config(a.config, ca)
    ok = ModelChecker(ca).check(x, c, phi)
    print("true" if ok else "false", file=out)
    return 0 if ok else 1


def cmd_orbits(a, out) -> int:
    ca = io.load_automaton(a.file)
    cells = [_cell(ca, a.cell)] if a.cell else list(ca.cells)
    for x in cells:
        rel = orbit_relation(ca, x)
        classes = " ".join("{" + ",".join(cl) + "}" for cl in rel.classes)
        print(f"{x}: {classes}  local configurations: {sum(1 for _ in local_configs(ca, x))}", file=out)
    return 0


def _report(v, out, label: str) -> int:
    if v.ok:
        print(f"{label}: pass", file=out)
        return 0
    print(f"{label}: fail: {v.reason}", file=out)
    return 1


def cmd_morphism(a, out) -> int:
    g, d = io.load_automaton(a.source), io.load_automaton(a.target)
    f = io.parse_cell_map(_read(a.map))
    if a.section is None:
        return _report(equivalence.check_pre_morphism(g, d, f), out, "pre-morphism")
    s = io.parse_section(_read(a.section))
    mode = _mode(a)
    if a.base is None:
        v = equivalence.check_pre_morphism(g, d, f)
        if v.ok:
            v = equivalence.check_section(g, d, f, s, mode)
        return _report(v, out, "morphism")
    x, y = _base(a.base, g, d)
    return _report(equivalence.check_cellular_morphism(g, x, d, y, f, s, mode), out, "cellular morphism")


def cmd_bisim(a, out) -> int:
    g, d = io.load_automaton(a.source), io.load_automaton(a.target)
    x, y = _base(a.base, g, d)
    r = equivalence.build_bisimulation(g, x, d, y)
    if isinstance(r, equivalence.BisimulationWitness):
        print(f"bisimilar: {len(r.pairs)} pairs", file=out)
        for p, q in r.pairs:
            print(f"  {p} ~ {q}", file=out)
        return 0
    phi, cg, cd = equivalence.distinguishing_formula(g, x, d, y, r)
    print(f"distinguished at {r.pair[0]} ~ {r.pair[1]} via {r.word}", file=out)
    print(f"formula: {serialize(phi)}", file=out)
    print(f"config {a.source}: {_fmt(cg)}", file=out)
    print(f"config {a.target}: {_fmt(cd)}", file=out)
    return 1


def cmd_transport(a, out) -> int:
    g, d = io.load_automaton(a.source), io.load_automaton(a.target)
    x, y = _base(a.base, g, d)
    t = io.parse_section(_read(a.spec))
    v = equivalence.check_logical_transport(g, x, d, y, t, a.depth, a.samples, a.seed)
    if not v.ok:
        print(f"transport: fail: {v.reason}", file=out)
        print(f"  configuration: {_fmt(v.witness['configuration'])}", file=out)
        return 1
    print(f"transport: pass ({a.samples} samples, depth {a.depth})", file=out)
    return 0


def cmd_analyze(a, out) -> int:
    ca = io.load_automaton(a.file)
    if a.one_way is not None:
        kind, L = "one-way", a.one_way
    else:
        kind, L = a.kind or "quiescent", 1
    r = analysis.analyze(ca, kind, a.cap, L)
    print(r.to_json() if a.json else r.render(), file=out)
    return 0 if r.verdict else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mca", description="Cellular automata over monoid actions.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check an automaton file")
    s.add_argument("file")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("evolve", help="print a trajectory")
    s.add_argument("file")
    s.add_argument("--config", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.set_defaults(run=cmd_evolve)

    s = sub.add_parser("check", help="model-check a formula")
    s.add_argument("file")
    s.add_argument("--cell")
    s.add_argument("--config")
    s.add_argument("--formula", required=True)
    s.add_argument("--valid", action="store_true")
    s.add_argument("--sample", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("orbits", help="orbit classes and local configuration counts")
    s.add_argument("file")
    s.add_argument("--cell")
    s.set_defaults(run=cmd_orbits)

    s = sub.add_parser("morphism", help="check a cell map, optionally with a section and base points")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--map", required=True)
    s.add_argument("--section")
    s.add_argument("--base")
    s.add_argument("--sample", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(run=cmd_morphism)

    s = sub.add_parser("bisim", help="build a bisimulation or a distinguishing formula")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--base")
    s.set_defaults(run=cmd_bisim)

    s = sub.add_parser("transport", help="test a logical transport on random formulas")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--spec", required=True)
    s.add_argument("--base")
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(run=cmd_transport)

    s = sub.add_parser("analyze", help="whole-space analyses")
    s.add_argument("file")
    g = s.add_mutually_exclusive_group()
    for flag, kind in (("--quiescent", "quiescent"), ("--periodic", "periodic"),
                       ("--nilpotent", "nilpotent"), ("--fixed-points", "fixed-points")):
        g.add_argument(flag, dest="kind", action="store_const", const=kind)
    g.add_argument("--one-way", type=int, metavar="L")
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.add_argument("--json", action="store_true")
    s.set_defaults(run=cmd_analyze)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.run(args, out)
    except ValidationFailed as exc:
        print(f"mca: invalid automaton: {exc}", file=err)
        return 2
    except OSError as exc:
        print(f"mca: {exc.filename}: {exc.strerror}", file=err)
        return 2
    except (UsageError, MCAError, ValueError) as exc:
        print(f"mca: {exc}", file=err)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
