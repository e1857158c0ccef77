"""Seeded property suites for the lattice-counting and geometry facts the
entropy bounds rest on. Each suite returns a :class:`SuiteResult` whose
``violations`` must be zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .planar import pick_counts, semiopen_rectangle_count
from .polytope import (
    Ball,
    IntVec,
    Polytope,
    boundary_measure,
    box,
    convex_hull,
    diameter,
    dot,
    erode,
    lattice_count,
    lattice_hull,
    lattice_points,
    minkowski_sum,
    morphological_boundary_counts,
    quermass,
    volume,
    with_origin,
)
from .spheres import (
    Degenerate,
    Nondegenerate,
    circumsphere,
    dual_polytope,
    normalized,
    slab_polytope,
    smallest_bounding_sphere,
    structuring_sphere,
)

XOR_DOMAIN: tuple[IntVec, ...] = ((1, 0), (0, 1))
CROSS_DOMAIN: tuple[IntVec, ...] = ((-1, 0), (0, -1), (0, 1), (1, 0))
UNIT_SQUARE = box((0, 0), (1, 1))


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    violations: int = 0
    first_failure: str = ""
    extra: dict = field(default_factory=dict)

    def check(self, ok: bool, message: Callable[[], str] | str = "") -> None:
        self.cases += 1
        if not ok:
            self.violations += 1
            if not self.first_failure:
                self.first_failure = message() if callable(message) else message

    @property
    def passed(self) -> bool:
        return self.violations == 0


# ------------------------------------------------------------ generators

def random_integral_polygon(rng: np.random.Generator, lo: int = -8, hi: int = 8,
                            max_points: int = 8) -> Polytope:
    """Hull of 3..max_points random lattice points, redrawn until two-dimensional."""
    while True:
        k = int(rng.integers(3, max_points + 1))
        pts = [tuple(int(c) for c in rng.integers(lo, hi + 1, size=2)) for _ in range(k)]
        p = convex_hull(pts, 2)
        if p.is_full:
            return p


def random_rational_polygon(rng: np.random.Generator, lo: int = -8, hi: int = 8,
                            denominator: int = 4) -> Polytope:
    while True:
        k = int(rng.integers(3, 9))
        pts = [tuple(Fraction(int(c), denominator)
                     for c in rng.integers(lo * denominator, hi * denominator + 1, size=2))
               for _ in range(k)]
        p = convex_hull(pts, 2)
        if p.is_full:
            return p


def random_structuring_set(rng: np.random.Generator, radius: int = 2) -> Polytope:
    """``cv(I U {0})`` for 1..4 random cells in a small box (possibly flat)."""
    k = int(rng.integers(1, 5))
    pts = [tuple(int(c) for c in rng.integers(-radius, radius + 1, size=2)) for _ in range(k)]
    return with_origin(pts, 2)


def _lattice_set(p: Polytope) -> set[IntVec]:
    return set(lattice_points(p))


# ---------------------------------------------------------------- suites

def suite_morphology(seed: int, cases: int = 200) -> SuiteResult:
    """Erosion and dilation against their set definitions on lattice points."""
    rng = np.random.default_rng([seed, 1])
    res = SuiteResult("morphology")
    for _ in range(cases):
        j = random_integral_polygon(rng)
        i = random_integral_polygon(rng, -3, 3, 4)
        sj = _lattice_set(j)
        ivs = [tuple(int(c) for c in v) for v in i.vertices]
        lo, hi = j.bbox()
        brute = {(x, y) for x in range(lo[0] - 4, hi[0] + 5) for y in range(lo[1] - 4, hi[1] + 5)
                 if all((x + a, y + b) in sj for a, b in ivs)}
        er = _lattice_set(erode(j, i))
        res.check(er == brute, lambda: f"erosion mismatch for J={j}, I={i}")
        dil = _lattice_set(minkowski_sum(j, i))
        si = _lattice_set(i)
        sums = {(a[0] + b[0], a[1] + b[1]) for a in sj for b in si}
        res.check(sj | sums <= dil if (0, 0) in si else sums <= dil,
                  lambda: f"dilation misses sums for J={j}, I={i}")
    return res


def suite_lattice_hull_boundaries(seed: int, cases: int = 50) -> SuiteResult:
    """Inner boundaries agree with those of the lattice hull; outer ones shrink."""
    rng = np.random.default_rng([seed, 2])
    res = SuiteResult("lattice_hull_boundaries")
    done = 0
    while done < cases:
        j = random_rational_polygon(rng)
        jj = lattice_hull(j)
        if not jj.is_full:
            continue
        done += 1
        i = random_structuring_set(rng)
        a = morphological_boundary_counts(j, i, with_sets=True)
        b = morphological_boundary_counts(jj, i, with_sets=True)
        res.check(a.inner_set == b.inner_set, lambda: f"inner boundaries differ for J={j}")
        res.check(set(b.outer_set) <= set(a.outer_set),
                  lambda: f"outer boundary of the lattice hull escapes for J={j}")
    return res


def boundary_injection(j: Polytope, i: Polytope) -> dict[IntVec, IntVec]:
    """Map each inner-boundary lattice point into the outer boundary.

    Facets are taken in order; a point goes with the first facet whose band
    ``x.N > offset - h_I(N)`` contains it and is shifted by the first vertex
    of ``I`` attaining ``h_I(N)``.
    """
    inner = morphological_boundary_counts(j, i, with_sets=True).inner_set
    verts = [tuple(int(c) for c in v) for v in i.vertices]
    shifts = []
    for f in j.facets:
        h = max(dot(f.normal, v) for v in verts)
        u = next(v for v in verts if dot(f.normal, v) == h)
        shifts.append((f, h, u))
    phi = {}
    for x in inner:
        for f, h, u in shifts:
            if dot(f.normal, x) > f.offset - h:
                phi[x] = tuple(a + b for a, b in zip(x, u))
                break
    return phi


def suite_inner_outer_injection(seed: int, cases: int = 200) -> SuiteResult:
    """``#inner <= #outer`` via an explicit injective, lattice-preserving map."""
    rng = np.random.default_rng([seed, 3])
    res = SuiteResult("inner_outer_injection")
    for _ in range(cases):
        j = random_integral_polygon(rng)
        i = random_structuring_set(rng)
        counts = morphological_boundary_counts(j, i, with_sets=True)
        res.check(counts.inner <= counts.outer, lambda: f"#inner > #outer for J={j}, I={i}")
        phi = boundary_injection(j, i)
        outer = set(counts.outer_set)
        images = list(phi.values())
        ok = (len(phi) == counts.inner and len(set(images)) == len(images)
              and all(y in outer for y in images))
        res.check(ok, lambda: f"boundary map not an injection into the outer boundary, J={j}, I={i}")
    return res


def suite_pick(seed: int, cases: int = 200) -> SuiteResult:
    rng = np.random.default_rng([seed, 4])
    res = SuiteResult("pick")
    for _ in range(cases):
        p = random_integral_polygon(rng)
        interior, bnd = pick_counts(p)
        res.check(volume(p) == interior + Fraction(bnd, 2) - 1, lambda: f"Pick fails on {p}")
    return res


def suite_count_volume_bounds(seed: int, cases: int = 200) -> SuiteResult:
    """``#K <= V(K + [0,1]^2)`` exactly and ``V(K) - p(K)/2 <= #K``."""
    rng = np.random.default_rng([seed, 5])
    res = SuiteResult("count_volume_bounds")
    for _ in range(cases):
        k = random_rational_polygon(rng) if rng.random() < 0.5 else random_integral_polygon(rng)
        n = lattice_count(k)
        res.check(n <= volume(minkowski_sum(k, UNIT_SQUARE)), lambda: f"#K above V(K+C) for {k}")
        res.check(float(volume(k)) - boundary_measure(k) / 2 <= n + 1e-9,
                  lambda: f"#K below V - p/2 for {k}")
    return res


def suite_rectangles(seed: int, cases: int = 200) -> SuiteResult:
    """Semi-open lattice rectangles contain exactly their area in lattice points."""
    rng = np.random.default_rng([seed, 6])
    res = SuiteResult("rectangles")
    done = 0
    while done < cases:
        a = tuple(int(c) for c in rng.integers(-5, 6, size=2))
        b = tuple(int(c) for c in rng.integers(-5, 6, size=2))
        if a == b:
            continue
        done += 1
        v = (b[0] - a[0], b[1] - a[1])
        g = math.gcd(*v)
        m = int(rng.integers(1, 5))
        h = m / math.hypot(v[0] // g, v[1] // g)
        orient = 1 if rng.random() < 0.5 else -1
        got = semiopen_rectangle_count(a, b, h, orient)
        res.check(got == g * m, lambda: f"rectangle {a}->{b}, m={m}: {got} != {g * m}")
    return res


def suite_erosion_by_ball(seed: int, cases: int = 200,
                          radii: Sequence[float] = (0.1, 0.5, 2.0)) -> SuiteResult:
    """``V(J) - V(J (-) B_r) <= r p(J)`` up to 1e-6."""
    rng = np.random.default_rng([seed, 7])
    res = SuiteResult("erosion_by_ball")
    for _ in range(cases):
        j = random_integral_polygon(rng)
        vj, pj = float(volume(j)), boundary_measure(j)
        for r in radii:
            lost = vj - float(volume(erode(j, Ball(r))))
            res.check(lost <= r * pj + 1e-6, lambda: f"r={r}: lost {lost} > {r * pj} on {j}")
    return res


def suite_inner_envelope(seed: int, cases: int = 200,
                         scales: Sequence[int] = (4, 8, 16)) -> SuiteResult:
    """``#inner(nO)/p(nO) <= diam(I') + sqrt(d) + 0.05``."""
    rng = np.random.default_rng([seed, 8])
    res = SuiteResult("inner_envelope")
    worst = -math.inf
    for _ in range(cases):
        o = random_integral_polygon(rng, -4, 4)
        i = random_structuring_set(rng)
        bound = diameter(i.vertices) + math.sqrt(2) + 0.05
        for n in scales:
            j = o.scale(n)
            ratio = morphological_boundary_counts(j, i).inner / boundary_measure(j)
            worst = max(worst, ratio - bound)
            res.check(ratio <= bound, lambda: f"n={n}: ratio {ratio} > {bound} for O={o}, I={i}")
    res.extra["worst_margin"] = worst
    return res


def suite_quermass_laws(seed: int, cases: int = 100) -> SuiteResult:
    """Homogeneity in ``I``, monotonicity under inclusion, translation invariance."""
    rng = np.random.default_rng([seed, 9])
    res = SuiteResult("quermass_laws")
    for _ in range(cases):
        o = random_rational_polygon(rng)
        i = random_integral_polygon(rng, -3, 3, 5)
        base = quermass(i, o)
        for k in range(1, 6):
            res.check(abs(quermass(i.scale(k), o) - k * base) <= 1e-9 * max(1.0, k * base),
                      lambda: f"homogeneity fails at k={k}")
        h = minkowski_sum(i, random_integral_polygon(rng, -2, 2, 4))
        h = convex_hull(list(i.vertices) + list(h.vertices), 2)
        res.check(base <= quermass(h, o) + 1e-9, "monotonicity fails")
        v = tuple(int(c) for c in rng.integers(-5, 6, size=2))
        res.check(abs(quermass(i.translate(v), o) - base) <= 1e-9 * max(1.0, abs(base)),
                  lambda: f"translation by {v} changes the quermass")
    return res


def suite_outer_volume_rate(seed: int, cases: int = 20,
                            scales: Sequence[int] = (1, 2, 5, 10, 20, 50, 100, 200)) -> SuiteResult:
    """``|V((nO + I) \\ nO)/n - V_I(O)| <= V(I)/n`` in the plane, error shrinking in ``n``."""
    rng = np.random.default_rng([seed, 10])
    res = SuiteResult("outer_volume_rate")
    for _ in range(cases):
        o = random_integral_polygon(rng, -4, 4)
        i = random_structuring_set(rng)
        q = quermass(i, o)
        c = float(volume(i))
        prev = math.inf
        for n in scales:
            no = o.scale(n)
            err = abs(float(volume(minkowski_sum(no, i)) - volume(no)) / n - q)
            res.check(err <= c / n + 1e-9, lambda: f"n={n}: error {err} > {c / n}")
            res.check(err <= prev + 1e-12, lambda: f"error grows at n={n}")
            prev = err
    return res


def suite_boundary_envelope(seed: int, cases: int = 20,
                            scales: Sequence[int] = (20, 50, 100, 200)) -> SuiteResult:
    """Lattice boundary counts inside the volume envelope built from (fac) and (bol).

    Per ``n`` the counts sit between exact volume bounds; the ratios to
    ``p(nO)`` stay within ``(V_C(O) + p(O)/2)/p(O)`` of ``V_I(O)/p(O)`` with
    ``C = [0,1]^2``.
    """
    rng = np.random.default_rng([seed, 11])
    res = SuiteResult("boundary_envelope")
    for _ in range(cases):
        o = random_integral_polygon(rng, -4, 4)
        i = random_structuring_set(rng)
        po = boundary_measure(o)
        target = quermass(i, o) / po
        slack = (quermass(UNIT_SQUARE, o) + po / 2) / po
        for n in scales:
            j = o.scale(n)
            bc = morphological_boundary_counts(j, i)
            dil, er = minkowski_sum(j, i), erode(j, i)
            vj, pj = float(volume(j)), boundary_measure(j)
            hi_out = float(volume(minkowski_sum(dil, UNIT_SQUARE))) - vj + pj / 2
            lo_out = float(volume(dil)) - boundary_measure(dil) / 2 \
                - float(volume(minkowski_sum(j, UNIT_SQUARE)))
            res.check(lo_out - 1e-9 <= bc.outer <= hi_out + 1e-9,
                      lambda: f"outer count {bc.outer} outside [{lo_out}, {hi_out}]")
            if er.is_full:
                hi_in = float(volume(minkowski_sum(j, UNIT_SQUARE))) - float(volume(er)) \
                    + boundary_measure(er) / 2
                lo_in = vj - pj / 2 - float(volume(minkowski_sum(er, UNIT_SQUARE)))
                res.check(lo_in - 1e-9 <= bc.inner <= hi_in + 1e-9,
                          lambda: f"inner count {bc.inner} outside [{lo_in}, {hi_in}]")
            for cnt in (bc.inner, bc.outer):
                res.check(abs(cnt / pj - target) <= slack + 1e-9,
                          lambda: f"n={n}: ratio {cnt / pj} beyond {target} +- {slack}")
    return res


def suite_bounding_sphere(seed: int, cases: int = 200) -> SuiteResult:
    """Welzl radius equals the brute-force minimum over spheres of <= d+1 points."""
    rng = np.random.default_rng([seed, 12])
    res = SuiteResult("bounding_sphere")
    for case in range(cases):
        d = 2 if case % 2 == 0 else 3
        k = int(rng.integers(1, 9))
        pts = sorted({tuple(Fraction(int(c)) for c in rng.integers(-4, 5, size=d))
                      for _ in range(k)})
        s = smallest_bounding_sphere(pts)
        best = None
        for size in range(1, d + 2):
            for sub in itertools.combinations(pts, size):
                ball = circumsphere(sub)
                if ball is None:
                    continue
                c, r2 = ball
                if all(dot(tuple(a - b for a, b in zip(p, c)),
                           tuple(a - b for a, b in zip(p, c))) <= r2 for p in pts):
                    best = r2 if best is None else min(best, r2)
        res.check(best == s.radius_sq, lambda: f"radius^2 {s.radius_sq} != brute {best} for {pts}")
    return res


def random_unit_perimeter_polygon(rng: np.random.Generator) -> Polytope:
    while True:
        k = int(rng.integers(3, 10))
        pts = [tuple(Fraction(int(c), 1000) for c in rng.integers(-1000, 1001, size=2))
               for _ in range(k)]
        p = convex_hull(pts, 2)
        if p.is_full:
            return normalized(p)


def suite_supremum(seed: int, cases: int = 500) -> SuiteResult:
    """Unit-perimeter quermass never exceeds the bounding radius of ``I U {0}``.

    The normalized dual polytope reaches it for the cross; slab duals of the
    degenerate XOR set approach it from below as the slab widens.
    """
    rng = np.random.default_rng([seed, 13])
    res = SuiteResult("supremum")
    spheres = {name: structuring_sphere(dom) for name, dom in
               (("xor", XOR_DOMAIN), ("cross", CROSS_DOMAIN))}
    hulls = {"xor": with_origin(XOR_DOMAIN, 2), "cross": with_origin(CROSS_DOMAIN, 2)}
    for _ in range(cases):
        o = random_unit_perimeter_polygon(rng)
        for name, s in spheres.items():
            v = quermass(hulls[name], o)
            res.check(v <= s.radius + 1e-9, lambda: f"{name}: V={v} > R={s.radius} on {o}")
    cross = spheres["cross"]
    cl = cross.classification
    assert isinstance(cl, Nondegenerate)
    best = quermass(hulls["cross"], normalized(dual_polytope(cl.generating, cross)))
    res.check(best >= cross.radius - 1e-6, f"cross dual reaches only {best}")
    res.extra["cross_dual"] = best
    xor = spheres["xor"]
    cl = xor.classification
    assert isinstance(cl, Degenerate)
    ratios = []
    for t in (1, 2, 5, 10, 50):
        slab = slab_polytope(cl, t)
        ratios.append(quermass(hulls["xor"], slab) / boundary_measure(slab))
    res.check(all(a < b for a, b in zip(ratios, ratios[1:])), f"slab ratios not increasing: {ratios}")
    res.check(ratios[-1] <= xor.radius + 1e-9, f"slab ratio {ratios[-1]} above R")
    res.extra["xor_slab_ratios"] = ratios
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "morphology": suite_morphology,
    "lattice_hull_boundaries": suite_lattice_hull_boundaries,
    "inner_outer_injection": suite_inner_outer_injection,
    "pick": suite_pick,
    "count_volume_bounds": suite_count_volume_bounds,
    "rectangles": suite_rectangles,
    "erosion_by_ball": suite_erosion_by_ball,
    "inner_envelope": suite_inner_envelope,
    "quermass_laws": suite_quermass_laws,
    "outer_volume_rate": suite_outer_volume_rate,
    "boundary_envelope": suite_boundary_envelope,
    "bounding_sphere": suite_bounding_sphere,
    "supremum": suite_supremum,
}


def run_suites(seed: int, names: Sequence[str] | None = None) -> list[SuiteResult]:
    return [SUITES[name](seed) for name in (names or list(SUITES))]
