"""Growth of determined regions, Lyapunov exponent estimates, Ruelle-type check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .automata import LocalRule, Pattern, determined_coordinates, power, random_pattern
from .entropy import itinerary_count_exact, itinerary_count_sampled, perimeter
from .errors import InvalidInputError, ResourceLimitError
from .polytope import (
    IntVec,
    Polytope,
    convex_hull,
    erode,
    lattice_count,
    lattice_points,
    volume,
)

ORACLE_CAP = 18


@dataclass(frozen=True)
class GrowthReport:
    J_id: str
    pattern_id: str
    determined: tuple[IntVec, ...]
    chosen: tuple[IntVec, ...]
    gr_value: int
    method: str


def growth_geometric_bound(rule: LocalRule, j: Polytope) -> int:
    """``#J - #(J (-) cv(I U {0}))``, valid for every pattern."""
    return lattice_count(j) - lattice_count(erode(j, rule.hull))


def _lattice_convex(points: Sequence[IntVec], dim: int) -> bool:
    """Whether the lattice points of ``cv(points)`` are exactly ``points``."""
    if len(points) <= 1:
        return True
    if dim == 1:
        xs = [p[0] for p in points]
        return max(xs) - min(xs) + 1 == len(points)
    hull = convex_hull(points, dim)
    if dim == 2 and hull.is_full:
        # Pick: lattice count = area + boundary/2 + 1 for an integral polygon.
        ring = hull.ring()
        bnd = sum(math.gcd(int(ring[i][0] - ring[i - 1][0]), int(ring[i][1] - ring[i - 1][1]))
                  for i in range(len(ring)))
        return volume(hull) + bnd / 2 + 1 == len(points)
    return lattice_count(hull) == len(points)


def _window(x: Pattern) -> tuple[list[IntVec], set[IntVec]]:
    pts = x.support()
    return pts, set(pts)


def _determined_inside(rule: LocalRule, x: Pattern, jset: set[IntVec]) -> list[IntVec]:
    return sorted(p for p in determined_coordinates(rule, x) if p in jset)


def growth_hull_shrink(rule: LocalRule, x: Pattern, j_id: str = "J",
                       pattern_id: str = "x") -> GrowthReport:
    """Upper bound on ``gr_J f(x)`` by greedily shrinking ``cv(D n J)``.

    The window ``J`` is the support of ``x``. The answer is never worse than
    the geometric bound.
    """
    jpts, jset = _window(x)
    det = _determined_inside(rule, x, jset)
    fallback = lattice_points(erode(convex_hull(jpts, rule.dim), rule.hull))
    if len(det) == len(fallback):
        # D n J always contains the eroded window, so the two coincide.
        return GrowthReport(j_id, pattern_id, tuple(det), tuple(fallback),
                            len(jpts) - len(det), "HullShrink")
    dset = set(det)
    current = list(det)
    while current and not _lattice_convex(current, rule.dim):
        hull = convex_hull(current, rule.dim)
        best = None
        for v in hull.vertices:
            v = tuple(int(c) for c in v)
            trial = [p for p in current if p != v]
            bad = sum(1 for p in lattice_points(convex_hull(trial, rule.dim)) if p not in dset) \
                if trial else 0
            score = (bad, v)
            if best is None or score < best[0]:
                best = (score, trial)
        current = best[1]
    chosen = current if len(current) >= len(fallback) else fallback
    return GrowthReport(j_id, pattern_id, tuple(det), tuple(chosen), len(jpts) - len(chosen),
                        "HullShrink")


def growth_exact_oracle(rule: LocalRule, x: Pattern, j_id: str = "J",
                        pattern_id: str = "x", cap: int = ORACLE_CAP) -> GrowthReport:
    """Exact ``gr_J f(x)`` by trying lattice-convex subsets of ``D n J``, largest first."""
    jpts, jset = _window(x)
    det = _determined_inside(rule, x, jset)
    if len(det) > cap:
        raise ResourceLimitError(f"{len(det)} determined cells exceed the oracle cap {cap}")
    for size in range(len(det), 0, -1):
        for subset in itertools.combinations(det, size):
            if _lattice_convex(subset, rule.dim):
                return GrowthReport(j_id, pattern_id, tuple(det), tuple(subset),
                                    len(jpts) - size, "ExhaustiveOracle")
    return GrowthReport(j_id, pattern_id, tuple(det), (), len(jpts), "ExhaustiveOracle")


# --------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExponentEstimate:
    O_id: str
    n: int
    p_J: float
    k_list: tuple[int, ...]
    mean_gr: tuple[float, ...]
    per_k: tuple[float, ...]
    chi_hat: float
    subadditivity_violations: int
    variances: tuple[float, ...]


def _powers(rule: LocalRule, k_max: int) -> list[LocalRule]:
    out = []
    for k in range(1, k_max + 1):
        r, derived = power(rule, k)
        if r is None:
            raise ResourceLimitError(f"f^{k} exceeds the table cap; lower k_max")
        out.append(r)
    return out


def chi_estimate(rule: LocalRule, o: Polytope, n: int, k_max: int, samples: int, seed: int,
                 o_id: str = "O") -> ExponentEstimate:
    """Average ``gr_{nO} f^k / (k p(nO))`` over uniform random patterns on ``nO``."""
    if k_max < 1 or samples < 1:
        raise InvalidInputError("k_max and samples must be positive")
    j = o.scale(n)
    jpts = lattice_points(j)
    p_j = perimeter(j)
    powers = _powers(rule, k_max)
    values = np.zeros((samples, k_max))
    for s in range(samples):
        x = random_pattern(jpts, rule.q, np.random.default_rng([seed, s]))
        for k, rk in enumerate(powers, start=1):
            values[s, k - 1] = growth_hull_shrink(rk, x).gr_value
    means = values.mean(axis=0)
    per_k = tuple(float(means[k - 1] / (k * p_j)) for k in range(1, k_max + 1))
    violations = 0
    for a in range(1, k_max + 1):
        for b in range(a, k_max + 1 - a):
            if means[a + b - 1] > means[a - 1] + means[b - 1] + 1e-9:
                violations += 1
    return ExponentEstimate(o_id, n, p_j, tuple(range(1, k_max + 1)),
                            tuple(float(m) for m in means), per_k, per_k[-1], violations,
                            tuple(float(v) for v in values.var(axis=0)))


@dataclass(frozen=True)
class RuelleReport:
    h_rate: float
    bound: float
    satisfied: bool
    exact: bool
    chi: ExponentEstimate


def ruelle_report(rule: LocalRule, o: Polytope, n: int = 20, k_max: int = 2,
                  samples: int = 8, seed: int = 0, *, count_samples: int = 200_000) -> RuelleReport:
    """Compare the entropy rate on ``nO`` with ``log q * chi_hat``.

    ``h_rate`` is the per-step growth of the history count divided by
    ``p(nO)``, taken at step ``max(2, k_max)``: exact for linear rules,
    a sampled lower estimate otherwise.
    """
    chi = chi_estimate(rule, o, n, k_max, samples, seed)
    j = o.scale(n)
    top = max(2, k_max)
    if rule.is_algebraic:
        a = itinerary_count_exact(rule, j, top - 1)
        b = itinerary_count_exact(rule, j, top)
        exact = True
    else:
        a = itinerary_count_sampled(rule, j, top - 1, count_samples, seed)
        b = itinerary_count_sampled(rule, j, top, count_samples, seed)
        exact = False
    h_rate = (math.log(b) - math.log(a)) / chi.p_J
    bound = math.log(rule.q) * chi.chi_hat
    return RuelleReport(h_rate, bound, h_rate <= bound * 1.05 + 1e-12, exact, chi)
