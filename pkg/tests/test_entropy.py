import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_entropy.automata import LocalRule, and_rule
from lattice_entropy.entropy import (
    EntropyRow,
    ExhaustionSpec,
    dependence_support,
    entropy_slope,
    itinerary_count_exact,
    itinerary_count_sampled,
    perp_boundary,
    rank_mod_p,
    refinement_lower_bound,
    rescaled_entropy_table,
    upper_bound_rate,
    window_upper_bound,
)
from lattice_entropy.errors import InvalidInputError, NotApplicableError, ResourceLimitError
from lattice_entropy.polytope import (
    box,
    convex_hull,
    cube,
    lattice_count,
    lattice_points,
    morphological_boundary_counts,
)

import oracles

XOR = LocalRule.algebraic(2, 2, {(1, 0): 1, (0, 1): 1})
CROSS = LocalRule.algebraic(2, 2, {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1})
LEDRAPPIER = LocalRule.algebraic(1, 2, {(0,): 1, (1,): 1})
AND1 = and_rule(1)
MIXED_DOMAIN = [(-1, 0), (0, 0), (0, 1)]
MIXED = LocalRule.from_table(2, 2, MIXED_DOMAIN, [a ^ (b & c) for a in (0, 1) for b in (0, 1)
                                                  for c in (0, 1)])
MAJORITY3 = LocalRule.from_table(1, 3, [(-1,), (1,)], [(a * b + 1) % 3 for a in range(3)
                                                       for b in range(3)])


@pytest.mark.parametrize("rule, fn, window, k", [
    (AND1, lambda s: s[0] & s[1], box((0,), (2,)), 3),
    (LEDRAPPIER, lambda s: (s[0] + s[1]) % 2, box((0,), (3,)), 3),
    (MAJORITY3, lambda s: (s[0] * s[1] + 1) % 3, box((0,), (1,)), 2),
    (MIXED, lambda s: s[0] ^ (s[1] & s[2]), box((0, 0), (1, 1)), 2),
    (XOR, lambda s: (s[0] + s[1]) % 2, box((0, 0), (1, 1)), 2),
])
def test_exact_counts_match_simulation(rule, fn, window, k):
    pts = lattice_points(window)
    expected = oracles.itinerary_count(fn, rule.domain, rule.q, pts, k)
    assert itinerary_count_exact(rule, window, k, method="enumerate") == expected
    if rule.is_algebraic:
        assert itinerary_count_exact(rule, window, k, method="rank") == expected


def test_ledrappier_counts():
    for m in (3, 5, 8):
        j = box((0,), (m - 1,))
        assert [itinerary_count_exact(LEDRAPPIER, j, k) for k in (1, 2, 3)] == \
            [2 ** (m + k - 1) for k in (1, 2, 3)]


def test_xor_counts_on_three_by_three():
    j = box((0, 0), (2, 2))
    assert [itinerary_count_exact(XOR, j, k) for k in (1, 2, 3)] == [2**9, 2**14, 2**19]
    assert len(dependence_support(XOR, j, 3)) == 21


def test_cross_large_window_by_rank():
    assert itinerary_count_exact(CROSS, cube(20, 2), 3) == 2**2001


@given(st.integers(1, 3), st.integers(1, 3), st.sampled_from([XOR, CROSS, LEDRAPPIER]))
@settings(max_examples=25)
def test_rank_equals_enumeration(n, k, rule):
    j = cube(n, rule.dim) if rule.dim == 2 else box((0,), (3 * n,))
    try:
        enum = itinerary_count_exact(rule, j, k, method="enumerate", cap=2**22)
    except ResourceLimitError:
        return
    assert itinerary_count_exact(rule, j, k, method="rank") == enum


def test_rank_route_needs_linear_rule():
    with pytest.raises(NotApplicableError):
        itinerary_count_exact(AND1, box((0,), (3,)), 2, method="rank")


def test_unknown_method():
    with pytest.raises(InvalidInputError):
        itinerary_count_exact(XOR, cube(1, 2), 2, method="magic")


def test_enumeration_cap():
    with pytest.raises(ResourceLimitError):
        itinerary_count_exact(AND1, box((0,), (40,)), 2)


def test_rank_mod_p():
    assert rank_mod_p(np.array([[1, 2], [2, 4]]), 5) == 1
    assert rank_mod_p(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]), 2) == 2
    assert rank_mod_p(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]), 3) == 3
    assert rank_mod_p(np.zeros((0, 3)), 2) == 0


@given(st.integers(0, 2**31), st.integers(-5, 5), st.integers(-5, 5))
@settings(max_examples=20)
def test_counts_are_translation_invariant(seed, a, b):
    j = convex_hull([(0, 0), (2, 0), (0, 2)])
    base = itinerary_count_exact(MIXED, j, 2)
    assert itinerary_count_exact(MIXED, j.translate((a, b)), 2) == base


def test_counts_grow_with_k_and_stay_below_the_inner_boundary_bound():
    for rule, j in ((MIXED, box((0, 0), (2, 1))), (AND1, box((0,), (5,))), (XOR, cube(2, 2))):
        counts = [itinerary_count_exact(rule, j, k) for k in (1, 2, 3)]
        assert counts == sorted(counts)
        inner = morphological_boundary_counts(j, rule.domain).inner
        for k, c in enumerate(counts, start=1):
            assert c <= rule.q ** (lattice_count(j) + (k - 1) * inner)


@pytest.mark.parametrize("rule, n", [(XOR, 1), (XOR, 3), (CROSS, 2), (LEDRAPPIER, 4)])
def test_refinement_lower_bound_holds(rule, n):
    j = cube(n, rule.dim)
    n1 = itinerary_count_exact(rule, j, 1)
    for extra in (1, 2):
        assert itinerary_count_exact(rule, j, 1 + extra) >= n1 * refinement_lower_bound(rule, j, extra)


def test_refinement_needs_permutative_rule():
    with pytest.raises(NotApplicableError):
        refinement_lower_bound(AND1, box((0,), (3,)), 1)


def test_certified_boundary_sizes():
    for n in (1, 2, 5, 9):
        assert len(perp_boundary(cube(n, 2), XOR.domain).certified) == 4 * n + 1
        assert len(perp_boundary(cube(n, 2), CROSS.domain).certified) == 8 * n


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=3, max_size=6))
def test_certified_points_lie_in_the_inner_boundary(pts):
    j = convex_hull(pts, 2)
    if not j.is_full:
        return
    pb = perp_boundary(j, CROSS.domain)
    inner = set(morphological_boundary_counts(j, CROSS.domain, with_sets=True).inner_set)
    assert set(pb.certified) <= inner
    assert set(pb.order) == inner


def test_sampled_counts_are_lower_bounds_and_thread_invariant():
    j = box((0, 0), (2, 1))
    exact = itinerary_count_exact(MIXED, j, 2)
    one = itinerary_count_sampled(MIXED, j, 2, 40_000, seed=7)
    two = itinerary_count_sampled(MIXED, j, 2, 40_000, seed=7, threads=2)
    assert one == two <= exact
    assert one == exact  # the space is small enough to be covered


def test_exact_enumeration_thread_invariant():
    j = box((0,), (17,))
    assert itinerary_count_exact(AND1, j, 2, threads=3) == itinerary_count_exact(AND1, j, 2)


def test_entropy_slope():
    assert entropy_slope([2, 8, 32]) == pytest.approx(math.log(4))
    assert entropy_slope([2, (8, True), (30, False)]) == pytest.approx(math.log(4))
    with pytest.raises(InvalidInputError):
        entropy_slope([(3, False), (5, False)])


def test_upper_bound_rates():
    assert upper_bound_rate(XOR, cube(1, 2)) == pytest.approx(0.5 * math.log(2))
    assert upper_bound_rate(CROSS, cube(1, 2)) == pytest.approx(math.log(2))
    assert upper_bound_rate(LEDRAPPIER, box((-1,), (1,))) == pytest.approx(0.5 * math.log(2))
    assert window_upper_bound(XOR, cube(3, 2)) == pytest.approx(14 * math.log(2))
    assert window_upper_bound(XOR, cube(3, 2), "inner") == pytest.approx(13 * math.log(2))
    with pytest.raises(InvalidInputError):
        window_upper_bound(XOR, cube(3, 2), "middle")


def test_entropy_table_rows():
    table = rescaled_entropy_table(XOR, ExhaustionSpec(cube(1, 2), (1, 2, 4)), 2, "exact")
    assert len(table.rows) == 6
    assert table.asymptotic_upper == pytest.approx(0.5 * math.log(2))
    for row in table.rows:
        assert row.perp_count == row.inner_count == 4 * row.n + 1
        assert row.lower_rate <= row.upper_rate + 1e-12
        assert set(EntropyRow.HEADER) <= set(row.as_dict())
    last = table.rows[-1]
    assert last.slope == pytest.approx(17 * math.log(2))
    assert last.J_id == "O*4"


def test_entropy_table_without_counts():
    table = rescaled_entropy_table(CROSS, ExhaustionSpec(cube(1, 2), (10,)), 1, "none")
    assert table.rows[0].N_k is None and table.rows[0].exact is None


def test_exhaustion_spec_validation():
    with pytest.raises(InvalidInputError):
        ExhaustionSpec(cube(1, 2), (2, 1))
    with pytest.raises(InvalidInputError):
        ExhaustionSpec(box((0, 0), (1, 1)), (1,))
