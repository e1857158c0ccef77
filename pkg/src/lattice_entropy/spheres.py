"""Smallest bounding spheres, their degeneracy classes, and dual polytopes."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError, UnsupportedConfigurationError
from .polytope import (
    Facet,
    Point,
    Polytope,
    add,
    affine_rank,
    as_point,
    boundary_measure,
    convex_hull,
    dot,
    from_halfspaces,
    minkowski_sum,
    orthogonal_complement,
    scale_vec,
    solve_exact,
    sub,
)


# ----------------------------------------------------------------- Welzl

def _independent(points: Sequence[Point]) -> list[Point]:
    """Greedy affinely independent subset spanning the same affine hull."""
    keep = [points[0]]
    for p in points[1:]:
        if affine_rank(keep + [p]) == len(keep):
            keep.append(p)
    return keep


def circumsphere(boundary: Sequence[Point]) -> tuple[Point, Fraction] | None:
    """Smallest sphere through every point of ``boundary`` (centre in their affine hull)."""
    base = _independent(list(boundary))
    b0 = base[0]
    vs = [sub(b, b0) for b in base[1:]]
    if vs:
        gram = [[2 * dot(u, v) for v in vs] for u in vs]
        lam = solve_exact(gram, [dot(v, v) for v in vs])
        if lam is None:
            return None
        c = b0
        for li, v in zip(lam, vs):
            c = add(c, scale_vec(v, li))
    else:
        c = b0
    r2 = dot(sub(c, b0), sub(c, b0))
    if any(dot(sub(p, c), sub(p, c)) != r2 for p in boundary):
        return None
    return c, r2


def _inside(ball, p: Point) -> bool:
    if ball is None:
        return False
    c, r2 = ball
    return dot(sub(p, c), sub(p, c)) <= r2


def _welzl(points: list[Point], boundary: list[Point], d: int):
    ball = circumsphere(boundary) if boundary else None
    if len(boundary) == d + 1:
        return ball
    for i, p in enumerate(points):
        if not _inside(ball, p):
            ball = _welzl(points[:i], boundary + [p], d)
    return ball


@dataclass(frozen=True)
class PointSphere:
    """All input points coincide."""


@dataclass(frozen=True)
class Nondegenerate:
    generating: Polytope


@dataclass(frozen=True)
class Degenerate:
    """Centre on the relative boundary of cv(support).

    ``hyperplanes`` holds the flag ``H_1 > ... > H_l`` as facets through the
    centre; ``generating`` and ``dual`` are the terminal ``L`` and ``L'``
    inside ``H_l``.
    """

    hyperplanes: tuple[Facet, ...]
    generating: Polytope
    dual: Polytope

    @property
    def depth(self) -> int:
        return len(self.hyperplanes)


Classification = Union[PointSphere, Nondegenerate, Degenerate]


@dataclass(frozen=True, eq=False)
class BoundingSphere:
    center: Point
    radius_sq: Fraction
    support: tuple[Point, ...]
    points: tuple[Point, ...]

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)

    @cached_property
    def classification(self) -> Classification:
        return classify_bounding_sphere(self.points, self)


def smallest_bounding_sphere(points: Sequence[Sequence]) -> BoundingSphere:
    pts = sorted({as_point(p) for p in points})
    if not pts:
        raise InvalidInputError("bounding sphere of no points")
    d = len(pts[0])
    if d > 3:
        from .errors import UnsupportedDimensionError

        raise UnsupportedDimensionError(f"dimension {d} not supported")
    order = list(pts)
    random.Random(0).shuffle(order)
    c, r2 = _welzl(order, [], d)
    support = tuple(p for p in pts if dot(sub(p, c), sub(p, c)) == r2)
    return BoundingSphere(c, r2, support, tuple(pts))


def _unsigned_canonical(n: tuple[int, ...]) -> tuple[int, ...]:
    first = next(x for x in n if x != 0)
    return n if first > 0 else tuple(-x for x in n)


def classify_bounding_sphere(points: Sequence[Sequence], sphere: BoundingSphere) -> Classification:
    d = sphere.dim
    c = sphere.center
    if sphere.radius_sq == 0:
        return PointSphere()
    t = convex_hull(sphere.support, d)
    if t.contains_interior(c):
        return Nondegenerate(t)
    bounding = t.facets if t.is_full else t.relative
    active = [f for f in bounding if dot(f.normal, c) == f.offset]
    face = [v for v in t.vertices if all(dot(f.normal, v) == f.offset for f in active)]
    depth = d - affine_rank(face)
    if depth >= 2:
        raise UnsupportedConfigurationError(
            f"degeneracy depth {depth} in dimension {d} is not supported")
    normal = orthogonal_complement([sub(v, face[0]) for v in face[1:]], d)[0]
    normal = _unsigned_canonical(normal)
    off = dot(normal, c)
    if any(dot(normal, v) > off for v in t.vertices):
        normal, off = tuple(-x for x in normal), -off
    plane = Facet(normal, off)
    gen = convex_hull(face, d)
    cons = [(sub(v, c), sphere.radius_sq + dot(sub(v, c), c)) for v in gen.vertices]
    cons += [(plane.normal, plane.offset), (tuple(-x for x in plane.normal), -plane.offset)]
    return Degenerate((plane,), gen, from_halfspaces(d, cons))


def structuring_sphere(points: Sequence[Sequence]) -> BoundingSphere:
    """Bounding sphere of ``I U {0}``, the structuring set of a rule."""
    pts = [as_point(p) for p in points]
    d = len(pts[0])
    return smallest_bounding_sphere(pts + [(Fraction(0),) * d])


# ---------------------------------------------------------------- duals

def dual_polytope(t: Polytope, sphere: BoundingSphere) -> Polytope:
    """``{x : (x - c).(v - c) <= R^2}`` over the vertices ``v`` of ``t``."""
    c, r2 = sphere.center, sphere.radius_sq
    for v in t.vertices:
        if dot(sub(v, c), sub(v, c)) != r2:
            raise InvalidInputError(f"vertex {v} is not on the sphere")
    if not t.contains_interior(c):
        raise InvalidInputError("sphere centre must be interior to the generating polytope")
    return from_halfspaces(t.dim, [(sub(v, c), r2 + dot(sub(v, c), c)) for v in t.vertices])


def _frame(normal: Sequence[int], flip: bool) -> np.ndarray:
    """Orthonormal rows: first the unit normal, then a basis of its complement."""
    n = np.array(normal, dtype=float)
    n /= np.linalg.norm(n)
    d = len(n)
    rows = [n]
    for e in np.eye(d):
        v = e - sum(np.dot(e, r) * r for r in rows)
        if np.linalg.norm(v) > 1e-9:
            rows.append(v / np.linalg.norm(v))
        if len(rows) == d:
            break
    u = np.array(rows)
    if flip:
        u[0] = -u[0]
        if d > 1:
            u[1:] = u[1:][::-1] * -1
    return u


@dataclass(frozen=True, eq=False)
class SlabDual:
    """Float slab ``L' (+) [-R n, R n]`` of a degenerate sphere.

    ``frame`` is the isometry used to build the vertices; results do not
    depend on which admissible frame is chosen.
    """

    center: tuple[float, ...]
    frame: np.ndarray
    terminal: tuple[tuple[float, ...], ...]
    half_width: float

    @cached_property
    def vertices(self) -> np.ndarray:
        u = self.frame
        c = np.array(self.center)
        local = (np.array(self.terminal) - c) @ u.T  # first coordinate is ~0
        out = []
        for s in (-1.0, 1.0):
            pts = local.copy()
            pts[:, 0] = s * self.half_width
            out.append(pts @ u + c)
        return np.vstack(out)

    def atoms(self) -> list[tuple[tuple[float, ...], float, int]]:
        """``(unit normal, facet measure, category)``; category 2 faces are the slab ends."""
        from scipy.spatial import ConvexHull

        verts = self.vertices
        d = verts.shape[1]
        normal = self.frame[0]
        if d == 2:
            ring = verts[ConvexHull(verts).vertices]
            out = []
            for i in range(len(ring)):
                a, b = ring[i], ring[(i + 1) % len(ring)]
                e = b - a
                nrm = np.array([e[1], -e[0]]) / np.linalg.norm(e)
                cat = 2 if abs(abs(nrm @ normal) - 1) < 1e-9 else 1
                out.append((tuple(float(x) for x in nrm), float(np.linalg.norm(e)), cat))
            return out
        hull = ConvexHull(verts)
        groups: dict[tuple, float] = {}
        for simplex, eq in zip(hull.simplices, hull.equations):
            key = tuple(float(x) for x in np.round(eq[:3], 9))
            a, b, c = verts[simplex]
            groups[key] = groups.get(key, 0.0) + 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))
        return [(k, m, 2 if abs(abs(np.dot(k, normal)) - 1) < 1e-9 else 1)
                for k, m in sorted(groups.items())]

    @property
    def perimeter(self) -> float:
        return math.fsum(m for _, m, _ in self.atoms())


def slab_dual(points: Sequence[Sequence], classification: Classification, radius: float,
              flip: bool = False) -> SlabDual:
    if not isinstance(classification, Degenerate):
        raise InvalidInputError("slab duals need a degenerate classification")
    if classification.depth != 1:
        raise UnsupportedConfigurationError("only one-step degeneracy is supported")
    plane = classification.hyperplanes[0]
    sphere = smallest_bounding_sphere(points)
    c = tuple(float(x) for x in sphere.center)
    terminal = tuple(tuple(float(x) for x in v) for v in classification.dual.vertices)
    return SlabDual(c, _frame(plane.normal, flip), terminal, float(radius))


def slab_domain(points: Sequence[Sequence], radius: float,
                max_denominator: int = 10**6) -> Polytope:
    """Exact rational slab dual of ``cv(points U {0})`` with half-width close to ``radius``.

    The slab direction is the integer normal ``n`` of the degeneracy
    hyperplane; the half-width is ``t |n|`` with ``t`` a rational
    approximation of ``radius / |n|``.
    """
    sphere = structuring_sphere(points)
    cl = sphere.classification
    if not isinstance(cl, Degenerate):
        raise InvalidInputError("slab duals need a degenerate structuring sphere")
    n = cl.hyperplanes[0].normal
    t = Fraction(radius / math.sqrt(dot(n, n))).limit_denominator(max_denominator)
    return slab_polytope(cl, t)


def slab_polytope(cl: Degenerate, t) -> Polytope:
    """Exact ``L' (+) [-t n, t n]`` for the integer hyperplane normal ``n``."""
    t = Fraction(t)
    n = cl.hyperplanes[0].normal
    seg = convex_hull([scale_vec(n, -t), scale_vec(n, t)], len(n))
    return minkowski_sum(cl.dual, seg)


def normalized(p: Polytope) -> Polytope:
    """Homothetic copy with unit perimeter (rational approximation of the factor)."""
    per = boundary_measure(p)
    return p.scale(Fraction(1 / per).limit_denominator(10**12))
