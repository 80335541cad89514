"""Text formats: automaton documents, cell maps, sections and configurations.

An automaton document is a sequence of bracketed sections::

    [monoid]
    generators = p, q
    p.q = ε
    [cells]
    names = k0, k1
    base = k0
    [action]
    k0.p = k1
    [states]
    count = 2
    [params]
    k1 = 1
    [neighborhood]
    z = ε
    [rule *]
    n(z)

``#`` starts a comment. Rule blocks may span several lines.
"""

from __future__ import annotations

import re
from collections import Counter
from pathlib import Path

from .automaton import CellularAutomaton, validate
from .common import ParseError, UnknownGenerator, ValidationFailed
from .equivalence import CellMapSpec, Const, Copy, SectionSpec
from .monoid import NAME_RE, MonoidPresentation, Word, parse_word
from .rulelang import parse_rule, serialize

_HEADER = re.compile(r"\[\s*(monoid|cells|action|states|params|neighborhood|rule\s+(\*|[A-Za-z][A-Za-z0-9_]*))\s*\]\Z")
_REQUIRED = ("monoid", "cells", "states", "neighborhood")


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _names(value: str, no: int) -> list[str]:
    out = [v.strip() for v in value.split(",") if v.strip()]
    for v in out:
        if not NAME_RE.match(v):
            raise ParseError(f"bad name {v!r}", line=no)
    return out


def _int(value: str, no: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise ParseError(f"expected an integer, got {value.strip()!r}", line=no) from None


def _split(line: str, sep: str, no: int) -> tuple[str, str]:
    if sep not in line:
        raise ParseError(f"expected '{sep}'", line=no)
    a, b = line.split(sep, 1)
    return a.strip(), b.strip()


def parse_automaton(text: str, check: bool = True) -> CellularAutomaton:
    sections: dict[str, list[tuple[int, str]]] = {}
    rules: dict[str, list[tuple[int, str]]] = {}
    current = None
    for no, line in _lines(text):
        if line.startswith("["):
            m = _HEADER.match(line)
            if not m:
                raise ParseError(f"unknown section {line}", line=no)
            if m.group(2):
                key = m.group(2)
                if key in rules:
                    raise ParseError(f"duplicate rule for {key}", line=no)
                current = rules.setdefault(key, [])
            else:
                key = m.group(1)
                if key in sections:
                    raise ParseError(f"duplicate section [{key}]", line=no)
                current = sections.setdefault(key, [])
            continue
        if current is None:
            raise ParseError("content before the first section", line=no)
        current.append((no, line))
    for key in _REQUIRED:
        if key not in sections:
            raise ParseError(f"missing section [{key}]")

    gens, rels, free = None, [], False
    for no, line in sections["monoid"]:
        a, b = _split(line, "=", no)
        if a == "generators":
            gens = _names(b, no)
        elif a == "free":
            free = b.lower() in ("true", "yes", "1")
        else:
            rels.append((no, a, b))
    if gens is None:
        raise ParseError("[monoid] needs a generators line")
    try:
        pres = MonoidPresentation(tuple(gens), (), free)
        relations = []
        for no, a, b in rels:
            try:
                relations.append((parse_word(a, pres), parse_word(b, pres)))
            except (ParseError, UnknownGenerator) as exc:
                raise ParseError(str(exc), line=no) from None
        pres = MonoidPresentation(tuple(gens), tuple(relations), free)
    except ValueError as exc:
        raise ParseError(str(exc)) from None

    cells, base = None, None
    for no, line in sections["cells"]:
        a, b = _split(line, "=", no)
        if a == "names":
            cells = _names(b, no)
        elif a == "base":
            base = b
        else:
            raise ParseError(f"unknown key {a!r} in [cells]", line=no)
    if not cells:
        raise ParseError("[cells] needs a names line")
    known = set(cells)

    def cell(name, no):
        if name not in known:
            raise ParseError(f"unknown cell {name!r}", line=no)
        return name

    if base is not None:
        cell(base, sections["cells"][0][0])

    action = {}
    for no, line in sections.get("action", []):
        a, target = _split(line, "=", no)
        src, _, g = a.rpartition(".")
        if g not in pres.generators:
            raise ParseError(f"unknown generator {g!r}", line=no)
        action[cell(src, no), g] = cell(target, no)

    count = None
    for no, line in sections["states"]:
        a, b = _split(line, "=", no)
        if a != "count":
            raise ParseError(f"unknown key {a!r} in [states]", line=no)
        count = _int(b, no)
    if count is None:
        raise ParseError("[states] needs a count line")

    params = {}
    for no, line in sections.get("params", []):
        a, b = _split(line, "=", no)
        params[cell(a, no)] = _int(b, no)

    nbhd = []
    for no, line in sections["neighborhood"]:
        a, b = _split(line, "=", no)
        if not NAME_RE.match(a):
            raise ParseError(f"bad neighborhood name {a!r}", line=no)
        try:
            nbhd.append((a, parse_word(b, pres)))
        except (ParseError, UnknownGenerator) as exc:
            raise ParseError(str(exc), line=no) from None

    exprs = {}
    for key, body in rules.items():
        if key != "*":
            cell(key, body[0][0] if body else 0)
        if not body:
            raise ParseError(f"empty rule block for {key}")
        try:
            exprs[key] = parse_rule(" ".join(line for _, line in body))
        except ParseError as exc:
            raise ParseError(str(exc), line=body[0][0]) from None
    missing = [c for c in cells if c not in exprs and "*" not in exprs]
    if missing:
        raise ParseError(f"no rule for cell {missing[0]!r}")

    try:
        ca = CellularAutomaton(pres, cells, action, count, nbhd, exprs, params, base)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if check:
        v = validate(ca)
        if not v.ok:
            raise ValidationFailed(v)
    return ca


def load_automaton(path, check: bool = True) -> CellularAutomaton:
    return parse_automaton(Path(path).read_text(encoding="utf-8"), check)


def dump_automaton(ca: CellularAutomaton) -> str:
    out = ["[monoid]", "generators = " + ", ".join(ca.pres.generators)]
    if ca.pres.free_hint:
        out.append("free = true")
    out += [f"{u} = {v}" for u, v in ca.pres.relations]
    out += ["", "[cells]", "names = " + ", ".join(ca.cells)]
    if ca.base is not None:
        out.append(f"base = {ca.base}")
    out += ["", "[action]"]
    for i, c in enumerate(ca.cells):
        for j, g in enumerate(ca.pres.generators):
            if ca.table[i, j] >= 0:
                out.append(f"{c}.{g} = {ca.cells[ca.table[i, j]]}")
    out += ["", "[states]", f"count = {ca.state_count}"]
    if ca.params.any():
        out += ["", "[params]"]
        out += [f"{c} = {int(k)}" for c, k in zip(ca.cells, ca.params) if k]
    out += ["", "[neighborhood]"]
    out += [f"{n} = {w}" for n, w in ca.neighborhood]
    default, _ = Counter(ca.rules).most_common(1)[0]
    out += ["", "[rule *]", serialize(default)]
    for c, e in zip(ca.cells, ca.rules):
        if e != default:
            out += ["", f"[rule {c}]", serialize(e)]
    return "\n".join(out) + "\n"


def save_automaton(ca: CellularAutomaton, path) -> None:
    Path(path).write_text(dump_automaton(ca), encoding="utf-8")


# -- small line formats ----------------------------------------------------------


def parse_cell_map(text: str) -> CellMapSpec:
    mapping = {}
    for no, line in _lines(text):
        a, b = _split(line, "->", no)
        for v in (a, b):
            if not NAME_RE.match(v):
                raise ParseError(f"bad cell name {v!r}", line=no)
        if a in mapping:
            raise ParseError(f"{a} mapped twice", line=no)
        mapping[a] = b
    return CellMapSpec(mapping)


def dump_cell_map(f: CellMapSpec) -> str:
    return "".join(f"{a} -> {b}\n" for a, b in f.mapping.items())


_DIRECTIVE = re.compile(r"(copy)\s+([A-Za-z][A-Za-z0-9_]*)\Z|(const)\s+(\d+)\Z")


def parse_section(text: str) -> SectionSpec:
    out = {}
    for no, line in _lines(text):
        a, b = _split(line, "<=", no)
        if not NAME_RE.match(a):
            raise ParseError(f"bad cell name {a!r}", line=no)
        m = _DIRECTIVE.match(b)
        if not m:
            raise ParseError(f"expected 'copy CELL' or 'const INT', got {b!r}", line=no)
        if a in out:
            raise ParseError(f"two directives for {a}", line=no)
        out[a] = Copy(m.group(2)) if m.group(1) else Const(int(m.group(4)))
    return SectionSpec(out)


def dump_section(s: SectionSpec) -> str:
    return "".join(
        f"{y} <= copy {d.source}\n" if isinstance(d, Copy) else f"{y} <= const {d.value}\n"
        for y, d in s.directives.items()
    )


def parse_configuration(text: str, ca: CellularAutomaton) -> tuple[int, ...]:
    """Comma-separated states in cell order, or ``cell=state`` lines."""
    if "=" not in text:
        try:
            return ca.configuration(int(v) for v in text.replace("\n", ",").split(",") if v.strip())
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    c = {}
    for no, line in _lines(text.replace(",", "\n")):
        a, b = _split(line, "=", no)
        if a not in ca.index:
            raise ParseError(f"unknown cell {a!r}", line=no)
        c[a] = _int(b, no)
    try:
        return ca.configuration(c)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
