"""Line-oriented rule files.

Algebraic::

    dim = 2
    alphabet = 2
    type = algebraic
    prime = 2
    cell (1,0) = 1
    cell (0,1) = 1

Table rules replace the ``cell`` lines with ``domain = (0,0),(1,0)`` and one
``map 01 -> 1`` row per input word (symbols in domain order; separate them
with spaces or commas when the alphabet exceeds ten symbols).
"""

from __future__ import annotations

import re

import numpy as np

from .automata import LocalRule, is_prime
from .errors import InvalidInputError, ParseError
from .textio import format_point, parse_points

_KEY_RE = re.compile(r"^\s*(dim|alphabet|type|prime|domain)\s*=\s*(.*?)\s*$")
_CELL_RE = re.compile(r"^\s*cell\s*(\([^)]*\))\s*=\s*(-?\d+)\s*$")
_MAP_RE = re.compile(r"^\s*map\s+(.+?)\s*->\s*(\d+)\s*$")


def _int(value: str, line: int, col: int) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ParseError(f"expected an integer, got {value!r}", line, col) from exc


def parse_rule_file(text: str) -> LocalRule:
    keys: dict[str, tuple[str, int]] = {}
    cells: list[tuple[tuple[int, ...], int, int]] = []
    rows: list[tuple[str, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        if m := _KEY_RE.match(line):
            if m.group(1) in keys:
                raise ParseError(f"duplicate key {m.group(1)!r}", lineno, col)
            keys[m.group(1)] = (m.group(2), lineno)
        elif m := _CELL_RE.match(line):
            try:
                (pt,) = parse_points(m.group(1))
            except (ParseError, ValueError) as exc:
                raise ParseError(f"bad cell {m.group(1)!r}", lineno, col) from exc
            if any(c.denominator != 1 for c in pt):
                raise ParseError("cell coordinates must be integers", lineno, col)
            cells.append((tuple(int(c) for c in pt), int(m.group(2)), lineno))
        elif m := _MAP_RE.match(line):
            rows.append((m.group(1), int(m.group(2)), lineno))
        else:
            word = line.strip().split()[0].split("=")[0]
            raise ParseError(f"unknown key {word!r}", lineno, col)

    for required in ("dim", "alphabet", "type"):
        if required not in keys:
            raise ParseError(f"missing key {required!r}")
    dim = _int(*keys["dim"], 1)
    q = _int(*keys["alphabet"], 1)
    kind = keys["type"][0]
    if kind == "algebraic":
        if rows or "domain" in keys:
            raise ParseError("algebraic rules take cell lines, not a table")
        p = _int(*keys["prime"], 1) if "prime" in keys else q
        if not is_prime(p):
            raise ParseError(f"{p} is not prime", keys.get("prime", keys["alphabet"])[1])
        if p != q:
            raise ParseError("alphabet must equal the prime", keys["alphabet"][1])
        if not cells:
            raise ParseError("algebraic rule has no cell lines")
        coeffs: dict[tuple[int, ...], int] = {}
        for pt, a, lineno in cells:
            if len(pt) != dim:
                raise ParseError(f"cell {pt} does not have {dim} coordinates", lineno)
            if pt in coeffs:
                raise ParseError(f"cell {pt} listed twice", lineno)
            if a % p == 0:
                raise ParseError(f"zero coefficient for cell {pt} mod {p}", lineno)
            coeffs[pt] = a
        return LocalRule.algebraic(dim, p, coeffs)
    if kind != "table":
        raise ParseError(f"unknown rule type {kind!r}", keys["type"][1])
    if cells or "prime" in keys:
        raise ParseError("table rules take domain and map lines")
    if "domain" not in keys:
        raise ParseError("table rule has no domain line")
    dtext, dline = keys["domain"]
    try:
        domain = [tuple(int(c) for c in p) for p in parse_points(dtext)]
    except ParseError as exc:
        raise ParseError(str(exc), dline) from exc
    k = len(domain)
    table = np.full(q**k, -1, dtype=np.int64)
    for word, out, lineno in rows:
        syms = _symbols(word, q, k, lineno)
        idx = 0
        for s in syms:
            idx = idx * q + s
        if table[idx] >= 0:
            raise ParseError(f"row {word!r} listed twice", lineno)
        if out >= q:
            raise ParseError(f"output symbol {out} outside the alphabet", lineno)
        table[idx] = out
    if (table < 0).any():
        raise ParseError(f"table has {(table < 0).sum()} missing rows of {q**k}")
    try:
        return LocalRule.from_table(dim, q, domain, table)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc


def _symbols(word: str, q: int, k: int, lineno: int) -> list[int]:
    parts = re.split(r"[\s,]+", word.strip())
    if len(parts) == 1 and q <= 10:
        parts = list(parts[0])
    if len(parts) != k:
        raise ParseError(f"row {word!r} needs {k} symbols", lineno)
    syms = [_int(p, lineno, 1) for p in parts]
    if any(s < 0 or s >= q for s in syms):
        raise ParseError(f"row {word!r} has a symbol outside the alphabet", lineno)
    return syms


def format_rule_file(rule: LocalRule) -> str:
    lines = [f"dim = {rule.dim}", f"alphabet = {rule.q}"]
    if rule.coefficients is not None:
        lines += ["type = algebraic", f"prime = {rule.q}"]
        lines += [f"cell {format_point(c)} = {a}" for c, a in zip(rule.domain, rule.coefficients)]
    else:
        lines.append("type = table")
        lines.append("domain = " + ",".join(format_point(c) for c in rule.domain))
        k = len(rule.domain)
        sep = "" if rule.q <= 10 else " "
        for idx, out in enumerate(rule.lookup):
            digits = np.unravel_index(idx, (rule.q,) * k) if k else ()
            lines.append(f"map {sep.join(str(int(d)) for d in digits)} -> {int(out)}")
    return "\n".join(lines) + "\n"
