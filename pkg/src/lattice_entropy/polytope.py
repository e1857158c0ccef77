"""Exact convex polytopes in dimension 1 to 3.

Combinatorial decisions (hulls, membership, lattice counts, support values)
use :class:`fractions.Fraction`; metric quantities (facet measures,
perimeters, quermass values) are floats computed from exact squared data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError, ResourceLimitError, UnsupportedDimensionError

Point = tuple[Fraction, ...]
IntVec = tuple[int, ...]

DEFAULT_BOX_CAP = 10_000


class Facet(NamedTuple):
    """Halfspace ``{x : x . normal <= offset}`` with a primitive outward normal."""

    normal: IntVec
    offset: Fraction


# ---------------------------------------------------------------- helpers

def as_point(p: Iterable) -> Point:
    out = []
    for c in p:
        if isinstance(c, float):
            if not math.isfinite(c):
                raise InvalidInputError(f"non-finite coordinate {c!r}")
            out.append(Fraction(c))
        else:
            out.append(Fraction(c))
    return tuple(out)


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def scale_vec(u: Sequence, s) -> tuple:
    return tuple(a * s for a in u)


def cross3(u: Sequence, v: Sequence) -> tuple:
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def primitive(v: Sequence) -> IntVec:
    """Scale a nonzero rational vector to the primitive integer vector along it."""
    fr = [Fraction(c) for c in v]
    den = reduce(math.lcm, (c.denominator for c in fr), 1)
    ints = [int(c * den) for c in fr]
    g = reduce(math.gcd, (abs(c) for c in ints), 0)
    if g == 0:
        raise InvalidInputError("zero vector has no primitive direction")
    return tuple(c // g for c in ints)


def _check_dim(dim: int) -> None:
    if dim not in (1, 2, 3):
        raise UnsupportedDimensionError(f"dimension {dim} not in {{1, 2, 3}}")


def _row_reduce(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def affine_rank(points: Sequence[Point]) -> int:
    if not points:
        return -1
    base = points[0]
    diffs = [list(sub(p, base)) for p in points[1:]]
    if not diffs:
        return 0
    rows, _ = _row_reduce(diffs)
    return len(rows)


def orthogonal_complement(vectors: Sequence[Sequence[Fraction]], dim: int) -> list[IntVec]:
    """Primitive integer basis of the orthogonal complement of ``vectors``."""
    if not vectors:
        return [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    rows, pivots = _row_reduce([list(map(Fraction, v)) for v in vectors])
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * dim
        v[f] = Fraction(1)
        for row, pc in zip(rows, pivots):
            v[pc] = -row[f]
        basis.append(primitive(v))
    return basis


def solve_exact(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Point | None:
    """Solve a square linear system exactly; ``None`` when singular."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return tuple(aug[i][n] for i in range(n))


def _hull_2d(points: Sequence[Point]) -> list[Point]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _facets_2d(ring: Sequence[Point]) -> list[Facet]:
    facets = []
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        normal = primitive((b[1] - a[1], a[0] - b[0]))  # outward for CCW ring
        facets.append(Facet(normal, dot(normal, a)))
    return facets


def _plane_facet(a: Point, b: Point, c: Point, pts: Sequence[Point]) -> Facet | None:
    """Supporting plane through three points with outward normal, or None."""
    n = cross3(sub(b, a), sub(c, a))
    if all(x == 0 for x in n):
        return None
    normal = primitive(n)
    off = dot(normal, a)
    above = below = False
    for p in pts:
        s = dot(normal, p) - off
        if s > 0:
            above = True
        elif s < 0:
            below = True
        if above and below:
            return None
    if above:
        normal = tuple(-x for x in normal)
        off = -off
    return Facet(normal, off)


def _facet_ring_3d(f: Facet, pts: Sequence[Point]) -> list[Point]:
    """Vertices of a 3D facet in cyclic order (by projection away from the normal)."""
    on = [p for p in pts if dot(f.normal, p) == f.offset]
    drop = max(range(3), key=lambda i: abs(f.normal[i]))
    keep = [i for i in range(3) if i != drop]
    proj = {(p[keep[0]], p[keep[1]]): p for p in on}
    ring2 = _hull_2d(list(proj))
    return [proj[q] for q in ring2]


def _hull_3d(points: Sequence[Point]) -> tuple[list[Facet], list[Point]]:
    pts = sorted(set(points))
    facets = _hull_3d_qhull(pts)
    if facets is None:
        facets = _hull_3d_brute(pts)
    verts: set[Point] = set()
    for f in facets:
        verts.update(_facet_ring_3d(f, pts))
    return sorted(facets), sorted(verts)


def _hull_3d_qhull(pts: Sequence[Point]) -> list[Facet] | None:
    """Candidate facets from qhull, accepted only after an exact closure check."""
    try:
        from scipy.spatial import ConvexHull, QhullError
    except ImportError:  # pragma: no cover - scipy is a declared dependency
        return None
    arr = np.array([[float(c) for c in p] for p in pts])
    try:
        hull = ConvexHull(arr)
    except (QhullError, ValueError):
        return None
    found: set[Facet] = set()
    for simplex in hull.simplices:
        f = _plane_facet(pts[simplex[0]], pts[simplex[1]], pts[simplex[2]], pts)
        if f is None:
            return None
        found.add(f)
    # Every edge of every facet polygon must be shared by exactly two facets.
    edge_count: dict[frozenset, int] = {}
    for f in found:
        ring = _facet_ring_3d(f, pts)
        if len(ring) < 3:
            return None
        for i in range(len(ring)):
            e = frozenset((ring[i], ring[(i + 1) % len(ring)]))
            edge_count[e] = edge_count.get(e, 0) + 1
    if any(c != 2 for c in edge_count.values()):
        return None
    return list(found)


def _hull_3d_brute(pts: Sequence[Point]) -> list[Facet]:
    found: set[Facet] = set()
    for a, b, c in itertools.combinations(pts, 3):
        f = _plane_facet(a, b, c, pts)
        if f is not None:
            found.add(f)
    return list(found)


def _to_int_constraint(normal: Sequence, offset) -> tuple[IntVec, int]:
    """Scale ``normal . x <= offset`` to integer coefficients."""
    vals = [Fraction(c) for c in normal] + [Fraction(offset)]
    den = reduce(math.lcm, (v.denominator for v in vals), 1)
    ints = [int(v * den) for v in vals]
    return tuple(ints[:-1]), ints[-1]


# --------------------------------------------------------------- polytope

@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex polytope with matching V- and H-representations.

    ``facets`` are only populated for full-dimensional bodies. Lower-dimensional
    bodies carry ``equalities`` (``normal . x == value``) and ``relative``
    inequalities that cut the body out of its affine hull; both are used for
    membership and lattice enumeration.
    """

    dim: int
    vertices: tuple[Point, ...]
    facets: tuple[Facet, ...]
    affine_dim: int
    equalities: tuple[Facet, ...] = ()
    relative: tuple[Facet, ...] = ()
    _ring: tuple[Point, ...] | None = field(default=None, repr=False)

    # ---------------------------------------------------------- basics
    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        _check_dim(dim)
        return cls(dim, (), (), -1)

    @property
    def is_empty(self) -> bool:
        return self.affine_dim < 0

    @property
    def is_full(self) -> bool:
        return self.affine_dim == self.dim

    @property
    def integral(self) -> bool:
        return all(c.denominator == 1 for v in self.vertices for c in v)

    def constraints(self) -> list[tuple[tuple, Fraction]]:
        """All inequalities ``a . x <= b`` describing the body (equalities doubled)."""
        cons: list[tuple[tuple, Fraction]] = [(f.normal, f.offset) for f in self.facets]
        cons += [(f.normal, f.offset) for f in self.relative]
        for e in self.equalities:
            cons.append((e.normal, e.offset))
            cons.append((tuple(-c for c in e.normal), -e.offset))
        return cons

    def contains(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        x = as_point(x)
        return all(dot(a, x) <= b for a, b in self.constraints())

    def contains_interior(self, x: Sequence) -> bool:
        """Strict interior membership (always False for lower-dimensional bodies)."""
        if not self.is_full:
            return False
        x = as_point(x)
        return all(dot(f.normal, x) < f.offset for f in self.facets)

    def translate(self, v: Sequence) -> "Polytope":
        v = as_point(v)
        if self.is_empty:
            return self

        def shift(fs):
            return tuple(Facet(f.normal, f.offset + dot(f.normal, v)) for f in fs)

        ring = None if self._ring is None else tuple(add(p, v) for p in self._ring)
        return Polytope(self.dim, tuple(sorted(add(p, v) for p in self.vertices)),
                        shift(self.facets), self.affine_dim, shift(self.equalities),
                        shift(self.relative), ring)

    def scale(self, s) -> "Polytope":
        """Homothety ``s * P`` about the origin; ``s`` must be positive."""
        s = Fraction(s)
        if s <= 0:
            raise InvalidInputError("scale factor must be positive")
        if self.is_empty:
            return self

        def sc(fs):
            return tuple(Facet(f.normal, f.offset * s) for f in fs)

        ring = None if self._ring is None else tuple(scale_vec(p, s) for p in self._ring)
        return Polytope(self.dim, tuple(scale_vec(p, s) for p in self.vertices),
                        sc(self.facets), self.affine_dim, sc(self.equalities),
                        sc(self.relative), ring)

    def ring(self) -> tuple[Point, ...]:
        """Vertices of a 2D polygon in counter-clockwise order."""
        if self.dim != 2:
            raise InvalidInputError("ring() is only defined in the plane")
        if self._ring is not None:
            return self._ring
        return tuple(_hull_2d(self.vertices))

    def bbox(self) -> tuple[IntVec, IntVec]:
        """Smallest integer box containing the body."""
        if self.is_empty:
            raise InvalidInputError("empty polytope has no bounding box")
        lo = tuple(math.ceil(min(v[i] for v in self.vertices)) for i in range(self.dim))
        hi = tuple(math.floor(max(v[i] for v in self.vertices)) for i in range(self.dim))
        return lo, hi

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.dim == other.dim and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash((self.dim, self.vertices))

    def __repr__(self) -> str:
        from .textio import format_polytope

        return f"Polytope({format_polytope(self)!r})"

    @cached_property
    def _int_constraints(self) -> tuple[tuple[IntVec, int], ...]:
        return tuple(_to_int_constraint(a, b) for a, b in self.constraints())


# ---------------------------------------------------------------- builders

def convex_hull(points: Iterable[Sequence], dim: int | None = None) -> Polytope:
    """Exact convex hull of a finite point set."""
    raw = list(points)
    if raw and all(isinstance(c, (int, np.integer)) for p in raw for c in p):
        # Integer input: hull with machine ints, convert only the survivors.
        ints = sorted({tuple(int(c) for c in p) for p in raw})
        d = len(ints[0]) if dim is None else dim
        if d == 2 and len(ints) > 8:
            ring = _hull_2d(ints)
            raw = ring if affine_rank([as_point(p) for p in ring[:3]]) == 2 else ints
        else:
            raw = ints
    pts = sorted({as_point(p) for p in raw})
    if not pts:
        if dim is None:
            raise InvalidInputError("convex hull of no points needs an explicit dim")
        return Polytope.empty(dim)
    d = len(pts[0]) if dim is None else dim
    _check_dim(d)
    if any(len(p) != d for p in pts):
        raise InvalidInputError("points do not share the ambient dimension")
    r = affine_rank(pts)
    if r == d:
        return _full_hull(pts, d)
    return _flat_hull(pts, d, r)


def _full_hull(pts: list[Point], d: int) -> Polytope:
    if d == 1:
        lo, hi = pts[0], pts[-1]
        return Polytope(1, (lo, hi), (Facet((-1,), -lo[0]), Facet((1,), hi[0])), 1)
    if d == 2:
        ring = _hull_2d(pts)
        return Polytope(2, tuple(sorted(ring)), tuple(sorted(_facets_2d(ring))), 2,
                        _ring=tuple(ring))
    facets, verts = _hull_3d(pts)
    return Polytope(3, tuple(verts), tuple(facets), 3)


def _flat_hull(pts: list[Point], d: int, r: int) -> Polytope:
    base = pts[0]
    diffs = [sub(p, base) for p in pts[1:]]
    normals = orthogonal_complement(diffs, d)
    eqs = tuple(Facet(n, dot(n, base)) for n in normals)
    if r == 0:
        return Polytope(d, (base,), (), 0, eqs)
    # Project onto pivot coordinates, where the projection is injective.
    _, pivots = _row_reduce([list(x) for x in diffs])
    proj = {tuple(p[i] for i in pivots): p for p in pts}
    sub_hull = _full_hull(sorted(proj), r)
    verts = tuple(sorted(proj[v] for v in sub_hull.vertices))
    rel = []
    for f in sub_hull.facets:
        normal = [0] * d
        for coef, i in zip(f.normal, pivots):
            normal[i] = coef
        rel.append(Facet(tuple(normal), f.offset))
    return Polytope(d, verts, (), r, eqs, tuple(sorted(rel)))


def from_halfspaces(dim: int, halfspaces: Iterable[tuple[Sequence, object]]) -> Polytope:
    """Bounded polytope ``{x : a . x <= b}``; empty when infeasible.

    Vertices are found by solving every ``dim``-subset of constraints and
    keeping feasible solutions, which is exact and adequate for the handful of
    facets used here.
    """
    _check_dim(dim)
    cons = [(tuple(Fraction(c) for c in a), Fraction(b)) for a, b in halfspaces]
    cands: set[Point] = set()
    for combo in itertools.combinations(cons, dim):
        sol = solve_exact([a for a, _ in combo], [b for _, b in combo])
        if sol is None:
            continue
        if all(dot(a, sol) <= b for a, b in cons):
            cands.add(sol)
    if not cands:
        return Polytope.empty(dim)
    return convex_hull(cands, dim)


def box(lo: Sequence, hi: Sequence) -> Polytope:
    corners = itertools.product(*[(a, b) for a, b in zip(lo, hi)])
    return convex_hull(corners, len(lo))


def cube(n, dim: int) -> Polytope:
    """The box ``[-n, n]^dim``."""
    return box([-n] * dim, [n] * dim)


def cross_polytope(n, dim: int) -> Polytope:
    pts = []
    for i in range(dim):
        for s in (-1, 1):
            e = [0] * dim
            e[i] = s * n
            pts.append(e)
    return convex_hull(pts, dim)


def with_origin(points: Iterable[Sequence], dim: int | None = None) -> Polytope:
    """``cv(I U {0})``, the hull used for all morphological boundaries."""
    pts = [as_point(p) for p in points]
    d = dim if dim is not None else len(pts[0])
    return convex_hull(pts + [tuple(Fraction(0) for _ in range(d))], d)


# ------------------------------------------------------------ operations

def support_function(p: Polytope | Sequence[Sequence], u: Sequence) -> Fraction:
    verts = p.vertices if isinstance(p, Polytope) else [as_point(v) for v in p]
    if not verts:
        raise InvalidInputError("support function of an empty set")
    return max(dot(v, u) for v in verts)


def _support_float(verts: Sequence[Point], u: Sequence[float]) -> float:
    return max(sum(float(a) * b for a, b in zip(v, u)) for v in verts)


def minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    if p.dim != q.dim:
        raise InvalidInputError("Minkowski sum of polytopes in different dimensions")
    if p.is_empty or q.is_empty:
        return Polytope.empty(p.dim)
    return convex_hull({add(a, b) for a in p.vertices for b in q.vertices}, p.dim)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball of the given radius centred at the origin (float mode)."""

    radius: float


def erode(p: Polytope, s: Polytope | Ball) -> Polytope:
    """``P (-) S = {x : x + S within P}`` via facet offsets ``h_P(N) - h_S(N)``."""
    if p.is_empty:
        return p
    if not p.is_full:
        # A flat body only survives erosion by a single point.
        if isinstance(s, Ball):
            return p if s.radius == 0 else Polytope.empty(p.dim)
        if len(s.vertices) == 1:
            return p.translate(scale_vec(s.vertices[0], -1))
        return from_halfspaces(p.dim, [
            (a, b - support_function(s, a)) for a, b in p.constraints()])
    if isinstance(s, Ball):
        cons = []
        for f in p.facets:
            norm = math.sqrt(dot(f.normal, f.normal))
            cons.append((f.normal, f.offset - Fraction(s.radius * norm)))
        return from_halfspaces(p.dim, cons)
    if s.dim != p.dim:
        raise InvalidInputError("erosion by a polytope of another dimension")
    if s.is_empty:
        raise InvalidInputError("erosion by the empty set")
    return from_halfspaces(p.dim, [(f.normal, f.offset - support_function(s, f.normal))
                                   for f in p.facets])


def _box_of(p: Polytope) -> tuple[IntVec, IntVec] | None:
    lo, hi = p.bbox()
    if any(a > b for a, b in zip(lo, hi)):
        return None
    return lo, hi


def _check_cap(lo: IntVec, hi: IntVec, cap: int) -> None:
    for a, b in zip(lo, hi):
        if b - a + 1 > cap:
            raise ResourceLimitError(
                f"bounding box side {b - a + 1} exceeds the lattice cap {cap}")


def _columns(p: Polytope, cap: int):
    """Yield ``(prefix, lo, hi)``: integer runs along the last axis inside ``p``."""
    if p.is_empty:
        return
    bb = _box_of(p)
    if bb is None:
        return
    lo, hi = bb
    _check_cap(lo, hi, cap)
    cons = p._int_constraints
    for prefix in itertools.product(*[range(a, b + 1) for a, b in zip(lo[:-1], hi[:-1])]):
        cl, ch = lo[-1], hi[-1]
        ok = True
        for a, b in cons:
            rest = b - sum(ai * xi for ai, xi in zip(a, prefix))
            ad = a[-1]
            if ad > 0:
                ch = min(ch, rest // ad)
            elif ad < 0:
                cl = max(cl, -(rest // -ad))
            elif rest < 0:
                ok = False
                break
            if cl > ch:
                ok = False
                break
        if ok:
            yield prefix, cl, ch


def lattice_points(p: Polytope, cap: int = DEFAULT_BOX_CAP) -> list[IntVec]:
    """Integer points of ``p`` in lexicographic order."""
    out: list[IntVec] = []
    for prefix, a, b in _columns(p, cap):
        out.extend(prefix + (z,) for z in range(a, b + 1))
    return out


def lattice_count(p: Polytope, cap: int = DEFAULT_BOX_CAP) -> int:
    return sum(b - a + 1 for _, a, b in _columns(p, cap))


def lattice_hull(p: Polytope, cap: int = DEFAULT_BOX_CAP) -> Polytope:
    """Convex hull of the integer points of ``p``."""
    pts = lattice_points(p, cap)
    return convex_hull(pts, p.dim)


# ---------------------------------------------------------------- metrics

def _vector_area_3d(ring: Sequence[Point]) -> tuple:
    acc = (Fraction(0),) * 3
    for i in range(len(ring)):
        acc = add(acc, cross3(ring[i], ring[(i + 1) % len(ring)]))
    return scale_vec(acc, Fraction(1, 2))


def volume(p: Polytope) -> Fraction:
    """Exact d-dimensional volume (zero for flat bodies)."""
    if not p.is_full:
        return Fraction(0)
    if p.dim == 1:
        return p.vertices[1][0] - p.vertices[0][0]
    if p.dim == 2:
        return _shoelace(p.ring())
    ref = p.vertices[0]
    total = Fraction(0)
    for f in p.facets:
        ring = _facet_ring_3d(f, p.vertices)
        area_n = abs(dot(_vector_area_3d(ring), f.normal))
        total += (f.offset - dot(f.normal, ref)) * area_n / dot(f.normal, f.normal)
    return total / 3


def _shoelace(ring: Sequence[Point]) -> Fraction:
    s = Fraction(0)
    for i in range(len(ring)):
        a, b = ring[i], ring[(i + 1) % len(ring)]
        s += a[0] * b[1] - a[1] * b[0]
    return abs(s) / 2


def _euclid(v: Sequence) -> float:
    return math.sqrt(float(sum(Fraction(c) ** 2 for c in v)))


def facet_measure(p: Polytope, f: Facet) -> float:
    """(d-1)-dimensional measure of the face of ``p`` on facet plane ``f``."""
    if p.dim == 1:
        return 1.0
    if p.dim == 2:
        on = [v for v in p.vertices if dot(f.normal, v) == f.offset]
        return _euclid(sub(on[-1], on[0]))
    ring = _facet_ring_3d(f, p.vertices)
    return abs(float(dot(_vector_area_3d(ring), f.normal))) / _euclid(f.normal)


@dataclass(frozen=True)
class AreaMeasureAtoms:
    """Discrete area measure: unit outward normals with facet measures."""

    atoms: tuple[tuple[tuple[float, ...], float], ...]

    @property
    def total(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)


def area_measure_atoms(p: Polytope) -> AreaMeasureAtoms:
    if not p.is_full:
        raise InvalidInputError("area measure needs a full-dimensional body")
    atoms = []
    for f in p.facets:
        n = _euclid(f.normal)
        atoms.append((tuple(float(c) / n for c in f.normal), facet_measure(p, f)))
    return AreaMeasureAtoms(tuple(atoms))


def boundary_measure(p: Polytope) -> float:
    """Perimeter ``p(P)``; 2 on the line, twice the relative volume for flat bodies."""
    if p.dim == 1:
        return 2.0
    if p.is_empty:
        return 0.0
    if p.is_full:
        return area_measure_atoms(p).total
    if p.affine_dim == 0:
        return 0.0
    if p.affine_dim == 1:
        return 2 * _euclid(sub(p.vertices[-1], p.vertices[0]))
    # Planar polygon in 3-space: twice its area.
    n = p.equalities[0].normal
    ring = _facet_ring_3d(Facet(n, dot(n, p.vertices[0])), p.vertices)
    return 2 * abs(float(dot(_vector_area_3d(ring), n))) / _euclid(n)


def quermass(i: Polytope | Sequence[Sequence], o) -> float:
    """First relative quermass integral ``V_I(O) = sum_F h_I(N_F) |F|``.

    ``o`` is a full-dimensional :class:`Polytope` or any object with an
    ``atoms()`` method returning ``(unit normal, mass)`` pairs.
    """
    verts = i.vertices if isinstance(i, Polytope) else [as_point(v) for v in i]
    atoms = o.atoms() if hasattr(o, "atoms") and not isinstance(o, Polytope) else \
        area_measure_atoms(o).atoms
    return math.fsum(_support_float(verts, u) * m for u, m, *_ in atoms)


@dataclass(frozen=True)
class BoundaryCounts:
    inner: int
    outer: int
    inner_set: tuple[IntVec, ...] | None = None
    outer_set: tuple[IntVec, ...] | None = None


def morphological_boundary_counts(j: Polytope, i: Polytope | Sequence[Sequence],
                                  with_sets: bool = False,
                                  cap: int = DEFAULT_BOX_CAP) -> BoundaryCounts:
    """Lattice sizes of ``J \\ (J (-) I')`` and ``(J (+) I') \\ J`` with ``I' = cv(I U {0})``."""
    ipts = i.vertices if isinstance(i, Polytope) else [as_point(v) for v in i]
    ii = with_origin(ipts, j.dim)
    er = erode(j, ii)
    di = minkowski_sum(j, ii)
    if not with_sets:
        nj = lattice_count(j, cap)
        return BoundaryCounts(nj - lattice_count(er, cap), lattice_count(di, cap) - nj)
    sj = set(lattice_points(j, cap))
    se = set(lattice_points(er, cap))
    sd = set(lattice_points(di, cap))
    inner = tuple(sorted(sj - se))
    outer = tuple(sorted(sd - sj))
    return BoundaryCounts(len(inner), len(outer), inner, outer)


def diameter(points: Sequence[Sequence]) -> float:
    pts = [as_point(p) for p in points]
    best = Fraction(0)
    for a, b in itertools.combinations(pts, 2):
        best = max(best, dot(sub(a, b), sub(a, b)))
    return math.sqrt(float(best))


def inner_boundary_points(j: Polytope, i: Polytope | Sequence[Sequence],
                          cap: int = DEFAULT_BOX_CAP) -> list[IntVec]:
    """Lattice points of ``J \\ (J (-) I')`` found column by column.

    Work is proportional to the boundary, not to ``#J``.
    """
    ipts = i.vertices if isinstance(i, Polytope) else [as_point(v) for v in i]
    er = erode(j, with_origin(ipts, j.dim))
    inner_runs = {prefix: (a, b) for prefix, a, b in _columns(er, cap)}
    out: list[IntVec] = []
    for prefix, a, b in _columns(j, cap):
        if prefix in inner_runs:
            c, d = inner_runs[prefix]
            zs = itertools.chain(range(a, c), range(d + 1, b + 1))
        else:
            zs = range(a, b + 1)
        out.extend(prefix + (z,) for z in zs)
    return out
