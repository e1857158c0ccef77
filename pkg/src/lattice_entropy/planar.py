"""Planar lattice helpers: semi-open rectangles, vertex angles, Pick counts."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .errors import InvalidInputError, UndefinedAngleError
from .polytope import Polytope, lattice_count


def semiopen_rectangle_count(a: Sequence[int], b: Sequence[int], h, orientation: int = 1) -> int:
    """Lattice points in ``{A + s(B-A) + t nu : 0 <= s < 1, 0 <= t < h}``.

    ``nu`` is the unit normal to ``AB`` on the left (``orientation=1``) or
    right (``orientation=-1``). The far side must be a lattice line, i.e.
    ``h * |w|`` is an integer ``m`` for the primitive direction ``w`` of ``AB``.
    Points are counted by an exact scan of the bounding box.
    """
    a = tuple(int(x) for x in a)
    b = tuple(int(x) for x in b)
    if a == b:
        raise InvalidInputError("rectangle base must have distinct endpoints")
    if orientation not in (1, -1):
        raise InvalidInputError("orientation must be +1 or -1")
    v = (b[0] - a[0], b[1] - a[1])
    g = math.gcd(*v)
    w = (v[0] // g, v[1] // g)
    nu = (-w[1] * orientation, w[0] * orientation)
    layers = float(h) * math.hypot(*w)
    m = round(layers)
    if m <= 0 or abs(layers - m) > 1e-9:
        raise InvalidInputError("far side of the rectangle does not meet the lattice")
    far = (nu[0] * Fraction(m, w[0] ** 2 + w[1] ** 2), nu[1] * Fraction(m, w[0] ** 2 + w[1] ** 2))
    corners = [a, b, (a[0] + far[0], a[1] + far[1]), (b[0] + far[0], b[1] + far[1])]
    xs = range(math.floor(min(c[0] for c in corners)), math.ceil(max(c[0] for c in corners)) + 1)
    ys = range(math.floor(min(c[1] for c in corners)), math.ceil(max(c[1] for c in corners)) + 1)
    vv = v[0] ** 2 + v[1] ** 2
    count = 0
    for x, y in itertools.product(xs, ys):
        dx, dy = x - a[0], y - a[1]
        s = dx * v[0] + dy * v[1]
        t = dx * nu[0] + dy * nu[1]
        if 0 <= s < vv and 0 <= t < m:
            count += 1
    return count


def min_vertex_angle(p: Polytope) -> float:
    """Smallest interior angle of a polygon, in radians."""
    if p.dim != 2 or not p.is_full:
        raise UndefinedAngleError("vertex angles need a two-dimensional polygon")
    ring = p.ring()
    best = math.pi
    n = len(ring)
    for i in range(n):
        prev, cur, nxt = ring[i - 1], ring[i], ring[(i + 1) % n]
        u = (float(prev[0] - cur[0]), float(prev[1] - cur[1]))
        v = (float(nxt[0] - cur[0]), float(nxt[1] - cur[1]))
        cosang = (u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))
        best = min(best, math.acos(max(-1.0, min(1.0, cosang))))
    return best


def boundary_lattice_count(p: Polytope) -> int:
    """Lattice points on the boundary of an integral polygon (edge gcd sum)."""
    ring = p.ring()
    total = 0
    for i in range(len(ring)):
        a, b = ring[i], ring[(i + 1) % len(ring)]
        total += math.gcd(int(b[0] - a[0]), int(b[1] - a[1]))
    return total


def pick_counts(p: Polytope) -> tuple[int, int]:
    """``(interior, boundary)`` lattice counts of an integral polygon."""
    if not p.integral:
        raise InvalidInputError("Pick counts need an integral polygon")
    bnd = boundary_lattice_count(p)
    return lattice_count(p) - bnd, bnd
