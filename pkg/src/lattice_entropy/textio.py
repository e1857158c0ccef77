"""Text forms for polytopes and ``--domain`` specifications."""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .polytope import Polytope, convex_hull, cross_polytope, cube

_POINT_RE = re.compile(r"\(([^()]*)\)")


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_point(p) -> str:
    return "(" + ",".join(_fmt(Fraction(c)) for c in p) + ")"


def format_polytope(p: Polytope) -> str:
    """``dim=2; vertices=(0,0),(1,0),(0,1)`` with rationals as ``p/q``."""
    return f"dim={p.dim}; vertices=" + ",".join(format_point(v) for v in p.vertices)


def parse_points(text: str) -> list[tuple[Fraction, ...]]:
    pts = []
    for m in _POINT_RE.finditer(text):
        try:
            pts.append(tuple(Fraction(c.strip()) for c in m.group(1).split(",")))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad coordinate in {m.group(0)!r}", column=m.start() + 1) from exc
    leftover = _POINT_RE.sub("", text).replace(",", "").strip()
    if leftover:
        raise ParseError(f"unexpected text {leftover!r} in point list")
    if not pts:
        raise ParseError("no points given")
    return pts


def parse_polytope(text: str) -> Polytope:
    fields = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ParseError(f"expected key=value, got {part.strip()!r}")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    if set(fields) != {"dim", "vertices"}:
        raise ParseError("polytope text needs exactly the keys dim and vertices")
    try:
        dim = int(fields["dim"])
    except ValueError as exc:
        raise ParseError(f"bad dim {fields['dim']!r}") from exc
    pts = parse_points(fields["vertices"])
    if any(len(p) != dim for p in pts):
        raise ParseError("vertex length does not match dim")
    return convex_hull(pts, dim)


def parse_domain(spec: str, dim: int = 2, structure=None) -> Polytope:
    """Build a window/limit domain from ``square:n``, ``cross:n``, ``poly:...``,
    ``slabdual:R`` or the polytope text form.

    ``slabdual`` needs the rule's structuring points ``structure``; ``R`` is the
    Euclidean half-width of the slab.
    """
    spec = spec.strip()
    if spec.startswith("dim="):
        return parse_polytope(spec)
    kind, _, arg = spec.partition(":")
    if not arg:
        raise ParseError(f"domain spec {spec!r} has no argument")
    if kind == "square":
        return cube(_scalar(arg), dim)
    if kind == "cross":
        return cross_polytope(_scalar(arg), dim)
    if kind == "poly":
        pts = parse_points(arg)
        if any(len(p) != dim for p in pts):
            raise ParseError("poly vertices do not match the dimension")
        return convex_hull(pts, dim)
    if kind == "slabdual":
        if structure is None:
            raise ParseError("slabdual domains need a rule")
        from .spheres import slab_domain

        return slab_domain(structure, float(_scalar(arg)))
    raise ParseError(f"unknown domain kind {kind!r}")


def _scalar(text: str) -> Fraction:
    try:
        v = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number {text!r}") from exc
    if v <= 0:
        raise ParseError(f"domain size must be positive, got {text!r}")
    return v
