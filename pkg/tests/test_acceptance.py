"""The ten numbered acceptance criteria, each at its stated tolerance and time budget."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from lattice_entropy.automata import LocalRule, and_rule, power, random_pattern
from lattice_entropy.entropy import (
    ExhaustionSpec,
    entropy_slope,
    itinerary_count_exact,
    perimeter,
    perp_boundary,
    rescaled_entropy_table,
)
from lattice_entropy.experiments import counting_rows
from lattice_entropy.lemmas import SUITES
from lattice_entropy.lyapunov import (
    chi_estimate,
    growth_exact_oracle,
    growth_hull_shrink,
    ruelle_report,
)
from lattice_entropy.polytope import (
    box,
    boundary_measure,
    convex_hull,
    cube,
    lattice_points,
    quermass,
    with_origin,
)
from lattice_entropy.spheres import (
    Degenerate,
    Nondegenerate,
    dual_polytope,
    normalized,
    slab_domain,
    structuring_sphere,
)

XOR = LocalRule.algebraic(2, 2, {(1, 0): 1, (0, 1): 1})
CROSS = LocalRule.algebraic(2, 2, {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
LEDRAPPIER = LocalRule.algebraic(1, 2, {(0,): 1, (1,): 1})
AND1 = and_rule(1)
AND2 = and_rule(2, [(0, 0), (1, 0), (0, 1)])
LOG2 = math.log(2)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


def square_rates(rule, scales):
    return rescaled_entropy_table(rule, ExhaustionSpec(cube(1, 2), tuple(scales)), 1, "none").rows


@pytest.mark.acceptance(1, "nondegenerate sandwich for the cross rule")
def test_cross_sandwich_is_exact():
    with Budget(10):
        sphere = structuring_sphere(CROSS.domain)
        assert sphere.radius_sq == 1
        assert isinstance(sphere.classification, Nondegenerate)
        target = sphere.radius * LOG2
        rows = square_rates(CROSS, range(1, 101))
        assert len(rows) == 100
        for row in rows:
            assert row.perp_count == row.inner_count == 8 * row.n
            assert row.lower_rate == pytest.approx(target, abs=1e-9)
            assert row.upper_rate == pytest.approx(target, abs=1e-9)


@pytest.mark.acceptance(2, "degenerate case for 2D XOR")
def test_xor_plateau_and_slab_family():
    with Budget(30):
        sphere = structuring_sphere(XOR.domain)
        assert sphere.radius_sq == Fraction(1, 2)
        assert sphere.radius == pytest.approx(math.sqrt(0.5), abs=1e-9)
        assert isinstance(sphere.classification, Degenerate)
        for row in square_rates(XOR, range(1, 201)):
            for rate in (row.lower_rate, row.upper_rate):
                assert abs(rate - 0.5 * LOG2) <= 1 / (8 * row.n)
        hull = with_origin(XOR.domain)
        for r in (1, 2, 5, 10, 20, 50):
            slab = slab_domain(XOR.domain, r)
            rate = quermass(hull, slab) / boundary_measure(slab) * LOG2
            closed = (1 + 2 * math.sqrt(2) * r) / (2 * math.sqrt(2) + 4 * r) * LOG2
            assert rate == pytest.approx(closed, abs=1e-9)
        assert abs(rate - math.sqrt(0.5) * LOG2) <= 0.01 * math.sqrt(0.5) * LOG2


@pytest.mark.acceptance(3, "one-dimensional entropy of the Ledrappier rule")
def test_ledrappier_counts_by_enumeration():
    with Budget(60):
        for m in range(1, 7):
            j = box((0,), (m,))
            counts = [itinerary_count_exact(LEDRAPPIER, j, k, method="enumerate")
                      for k in range(1, 9)]
            assert counts == [2 ** (m + k) for k in range(1, 9)]
            slope = entropy_slope(counts)
            assert slope == pytest.approx(LOG2, abs=1e-12)
            assert perimeter(j) == 2
            assert slope / perimeter(j) == pytest.approx(LOG2 / 2, abs=1e-12)


@pytest.mark.acceptance(4, "refinement growth on [0,2]^2 for XOR")
def test_xor_refinement_by_parallel_enumeration():
    with Budget(300):
        j = box((0, 0), (2, 2))
        perp = len(perp_boundary(j, XOR.domain).certified)
        counts = [itinerary_count_exact(XOR, j, k, method="enumerate", threads=8)
                  for k in (1, 2, 3)]
        assert counts == [2**9, 2**14, 2**19]
        for a, b in zip(counts, counts[1:]):
            assert b >= a * 2**perp


@pytest.mark.acceptance(5, "boundary counts per perimeter converge to V_I(O)/p(O)")
def test_boundary_count_rates():
    with Budget(20):
        domains = (cube(1, 2), convex_hull([(0, 0), (1, 0), (0, 1)]))
        for rule in (XOR, CROSS):
            for o in domains:
                rows, target = counting_rows(rule, o, (50, 100, 200, 300))
                assert target == pytest.approx(quermass(rule.hull, o) / boundary_measure(o))
                errors = [abs(r["inner"] / r["p_J"] - target) / target for r in rows]
                assert errors[-1] <= 0.02
                assert all(b <= a for a, b in zip(errors, errors[1:]))


@pytest.mark.acceptance(6, "exact lattice lemmas on 200 random polygons")
def test_lemma_suites():
    with Budget(120):
        names = ("lattice_hull_boundaries", "inner_outer_injection", "pick", "count_volume_bounds",
                 "rectangles", "erosion_by_ball", "inner_envelope")
        for name in names:
            result = SUITES[name](0, cases=200)
            assert result.cases >= 200
            assert result.passed, f"{name}: {result.first_failure}"


@pytest.mark.acceptance(7, "unit-perimeter quermass bounded by the sphere radius")
def test_supremum_suite():
    with Budget(10):
        result = SUITES["supremum"](0, cases=500)
        assert result.passed, result.first_failure
        sphere = structuring_sphere(CROSS.domain)
        dual = normalized(dual_polytope(sphere.classification.generating, sphere))
        assert boundary_measure(dual) == pytest.approx(1, abs=1e-9)
        assert quermass(CROSS.hull, dual) >= sphere.radius - 1e-6


@pytest.mark.acceptance(8, "domains of iterates have hull k times cv(I U {0})")
def test_power_hulls():
    with Budget(60):
        for rule in (XOR, CROSS):
            for k in (2, 3):
                rk, derived = power(rule, k)
                assert rk is not None and derived.domain_k == rk.domain
                assert with_origin(rk.domain) == rule.hull.scale(k)


@pytest.mark.acceptance(9, "growth heuristic agrees with the exhaustive oracle")
def test_growth_oracle_agreement():
    cases = [(XOR, box((0, 0), (4, 4)), True), (CROSS, box((0, 0), (5, 5)), True),
             (AND1, box((0,), (11,)), False), (AND2, box((0, 0), (3, 3)), False)]
    with Budget(120):
        for rule, j, permutative in cases:
            pts = lattice_points(j)
            for s in range(100):
                x = random_pattern(pts, rule.q, np.random.default_rng([17, s]))
                exact = growth_exact_oracle(rule, x)
                assert len(exact.determined) <= 18
                shrink = growth_hull_shrink(rule, x).gr_value
                if permutative:
                    assert exact.gr_value == shrink
                else:
                    assert exact.gr_value <= shrink
        for rule, o in ((XOR, cube(1, 2)), (CROSS, cube(1, 2)), (AND1, box((-1,), (1,)))):
            est = chi_estimate(rule, o, 10, 4, 20, 0)
            means = est.mean_gr
            for a in range(1, 5):
                for b in range(1, 5 - a):
                    assert means[a + b - 1] <= means[a - 1] + means[b - 1] + 1e-9
            assert est.subadditivity_violations == 0


@pytest.mark.acceptance(10, "entropy rate below log q times the growth exponent")
def test_ruelle_inequality():
    with Budget(180):
        for rule in (XOR, CROSS):
            rep = ruelle_report(rule, cube(1, 2), n=20, k_max=2, samples=8, seed=0)
            assert rep.h_rate <= LOG2 * rep.chi.chi_hat * 1.05
            assert rep.satisfied
