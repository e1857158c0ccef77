import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_entropy.automata import LocalRule, Pattern, and_rule, random_pattern, shift_rule
from lattice_entropy.errors import InvalidInputError, ResourceLimitError
from lattice_entropy.lyapunov import (
    chi_estimate,
    growth_exact_oracle,
    growth_geometric_bound,
    growth_hull_shrink,
    ruelle_report,
)
from lattice_entropy.polytope import box, cube, lattice_points

XOR = LocalRule.algebraic(2, 2, {(1, 0): 1, (0, 1): 1})
CROSS = LocalRule.algebraic(2, 2, {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
AND1 = and_rule(1)
AND2 = and_rule(2, [(0, 0), (1, 0), (0, 1)])
SHIFT = shift_rule(1, 2, (1,))


def test_geometric_bounds():
    assert growth_geometric_bound(XOR, cube(3, 2)) == 13
    assert growth_geometric_bound(SHIFT, box((0,), (9,))) == 1
    assert growth_geometric_bound(shift_rule(1, 2, (0,)), box((0,), (9,))) == 0


def test_shift_grows_by_one():
    x = Pattern.from_points([(i,) for i in range(10)], [0] * 10)
    assert growth_exact_oracle(SHIFT, x).gr_value == 1
    assert growth_hull_shrink(SHIFT, x).gr_value == 1


def test_xor_growth_on_small_square():
    pts = lattice_points(box((0, 0), (2, 2)))
    x = Pattern.from_points(pts, [1] * len(pts))
    assert growth_exact_oracle(XOR, x).gr_value == 5
    assert growth_hull_shrink(XOR, x).gr_value == 5


def test_and_rule_all_zero_keeps_everything():
    x = Pattern.from_points([(i,) for i in range(5)], [0] * 5)
    report = growth_hull_shrink(AND1, x)
    assert report.gr_value == 0
    assert report.method == "HullShrink"


def test_oracle_cap():
    pts = lattice_points(cube(3, 2))
    x = Pattern.from_points(pts, [0] * len(pts))
    with pytest.raises(ResourceLimitError):
        growth_exact_oracle(AND2, x, cap=5)


CASES = [(XOR, box((0, 0), (4, 4))), (CROSS, box((0, 0), (5, 5))), (AND1, box((0,), (11,))),
         (SHIFT, box((0,), (9,))), (AND2, box((0, 0), (3, 3)))]


@pytest.mark.parametrize("rule, j", CASES)
@given(seed=st.integers(0, 2**31))
@settings(max_examples=15)
def test_growth_estimates_are_ordered(rule, j, seed):
    x = random_pattern(lattice_points(j), rule.q, np.random.default_rng(seed))
    exact = growth_exact_oracle(rule, x).gr_value
    shrink = growth_hull_shrink(rule, x)
    assert exact <= shrink.gr_value <= growth_geometric_bound(rule, j)
    assert set(shrink.chosen) <= set(shrink.determined)


def test_chi_estimate_examples():
    est = chi_estimate(XOR, cube(1, 2), 10, 3, 4, 0)
    assert est.per_k == pytest.approx((0.5125, 0.5, 0.4875))
    assert est.chi_hat == est.per_k[-1]
    assert est.subadditivity_violations == 0
    assert est.variances == (0.0, 0.0, 0.0)  # a permutative rule determines exactly J (-) kI


def test_shift_exponent():
    est = chi_estimate(SHIFT, box((-1,), (1,)), 10, 2, 3, 0)
    assert est.chi_hat == pytest.approx(0.5)


def test_chi_estimate_is_seed_deterministic():
    a = chi_estimate(AND2, cube(1, 2), 4, 2, 5, 11)
    b = chi_estimate(AND2, cube(1, 2), 4, 2, 5, 11)
    assert a == b


def test_chi_estimate_validation():
    with pytest.raises(InvalidInputError):
        chi_estimate(XOR, cube(1, 2), 4, 0, 5, 0)


def test_ruelle_xor():
    rep = ruelle_report(XOR, cube(1, 2), n=20, k_max=2, samples=4)
    assert rep.exact
    assert rep.h_rate == pytest.approx(81 * math.log(2) / 160)
    assert rep.bound == pytest.approx(0.5 * math.log(2))
    assert rep.satisfied
