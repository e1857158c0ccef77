import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lattice_entropy.errors import InvalidInputError, ParseError, ResourceLimitError
from lattice_entropy.polytope import (
    Ball,
    box,
    boundary_measure,
    convex_hull,
    cross_polytope,
    cube,
    diameter,
    erode,
    from_halfspaces,
    inner_boundary_points,
    lattice_count,
    lattice_hull,
    lattice_points,
    minkowski_sum,
    morphological_boundary_counts,
    quermass,
    support_function,
    volume,
    with_origin,
)
from lattice_entropy.textio import format_polytope, parse_domain, parse_polytope

import oracles

TRIANGLE = convex_hull([(0, 0), (1, 0), (0, 1)])
XOR_I = [(1, 0), (0, 1)]
CROSS_I = [(1, 0), (-1, 0), (0, 1), (0, -1)]

small = st.integers(-6, 6)
point2 = st.tuples(small, small)
pointsets = st.lists(point2, min_size=1, max_size=7)


def full_polygon(pts):
    p = convex_hull(pts, 2)
    return p if p.is_full else None


# ---------------------------------------------------------------- examples

def test_hull_drops_interior_point():
    p = convex_hull([(0, 0), (2, 0), (0, 2), (1, 1)])
    assert p.vertices == ((0, 0), (0, 2), (2, 0))
    assert len(p.facets) == 3


def test_hull_of_collinear_points_is_a_segment():
    p = convex_hull([(i, 2 * i) for i in range(12)])
    assert p.affine_dim == 1
    assert p.vertices == ((0, 0), (11, 22))


def test_support_function_and_translation():
    i = with_origin(XOR_I)
    assert support_function(i, (1, 1)) == 1
    assert support_function(i.translate((1, 0)), (1, 1)) == 2


def test_minkowski_sum_of_square_and_triangle():
    hexagon = minkowski_sum(cube(1, 2), TRIANGLE)
    assert len(hexagon.vertices) == 5  # corner (2,2) is cut by x+y <= 3
    assert support_function(hexagon, (1, 0)) == 2
    assert support_function(hexagon, (-1, 0)) == 1
    assert support_function(hexagon, (1, 1)) == 3


def test_erosion_examples():
    assert erode(cube(3, 2), TRIANGLE) == box((-3, -3), (2, 2))
    assert erode(cube(5, 2), box((0, 0), (1, 1))) == box((-5, -5), (4, 4))


def test_erosion_by_larger_body_is_empty():
    assert erode(cube(1, 2), cube(2, 2)).is_empty


def test_lattice_counts():
    assert lattice_count(cube(1, 2)) == 9
    assert lattice_count(convex_hull([(0, 0), (2, 0), (0, 2)])) == 6
    assert lattice_count(cube(2, 3)) == 125


def test_lattice_cap_raises():
    with pytest.raises(ResourceLimitError):
        lattice_count(box((0, 0), (20, 20)), cap=10)


def test_volume_and_perimeter():
    assert volume(cube(1, 2)) == 4
    assert boundary_measure(cube(1, 2)) == 8
    tri = convex_hull([(0, 0), (2, 0), (0, 2)])
    assert volume(tri) == 2
    assert boundary_measure(tri) == pytest.approx(4 + 2 * math.sqrt(2), abs=1e-12)
    assert boundary_measure(box((0,), (5,))) == 2
    assert volume(cube(2, 3)) == 64
    assert boundary_measure(cube(2, 3)) == pytest.approx(96)
    assert volume(cross_polytope(1, 3)) == F(4, 3)


def test_quermass_examples():
    sq = cube(1, 2)
    assert quermass(with_origin(XOR_I), sq) == pytest.approx(4)
    assert quermass(with_origin(CROSS_I), sq) == pytest.approx(8)
    assert quermass(with_origin([(0, 0)]), sq) == 0


def test_boundary_counts_on_squares():
    for n in (1, 3, 4, 10):
        xor = morphological_boundary_counts(cube(n, 2), XOR_I)
        assert (xor.inner, xor.outer) == (4 * n + 1, 4 * n + 2)
        unit = morphological_boundary_counts(cube(n, 2), box((0, 0), (1, 1)))
        assert (unit.inner, unit.outer) == (4 * n + 1, 4 * n + 3)
        cr = morphological_boundary_counts(cube(n, 2), CROSS_I)
        assert (cr.inner, cr.outer) == (8 * n, 8 * n + 4)


def test_inner_boundary_points_match_set_difference():
    j = convex_hull([(0, 0), (9, 2), (4, 8), (-3, 5)])
    counts = morphological_boundary_counts(j, CROSS_I, with_sets=True)
    assert tuple(inner_boundary_points(j, CROSS_I)) == counts.inner_set


def test_diameter():
    assert diameter([(0, 0), (3, 4), (1, 1)]) == 5


def test_from_halfspaces_box():
    p = from_halfspaces(2, [((1, 0), 2), ((-1, 0), 1), ((0, 1), 3), ((0, -1), 0)])
    assert p == box((-1, 0), (2, 3))


def test_from_halfspaces_infeasible_is_empty():
    assert from_halfspaces(2, [((1, 0), 0), ((-1, 0), -1), ((0, 1), 1), ((0, -1), 1)]).is_empty


def test_lattice_hull_of_rational_triangle():
    t = convex_hull([(F(-1, 2), F(-1, 2)), (F(5, 2), F(-1, 2)), (F(-1, 2), F(5, 2))])
    assert lattice_hull(t) == convex_hull([(0, 0), (2, 0), (0, 2)])


def test_scale_requires_positive_factor():
    with pytest.raises(InvalidInputError):
        cube(1, 2).scale(0)


# ---------------------------------------------------------------- text form

def test_polytope_text_round_trip():
    p = convex_hull([(F(1, 2), 0), (3, 1), (0, 2)])
    text = format_polytope(p)
    assert text == "dim=2; vertices=(0,2),(1/2,0),(3,1)"
    assert parse_polytope(text) == p


def test_domain_specs():
    assert parse_domain("square:3") == cube(3, 2)
    assert parse_domain("cross:2") == cross_polytope(2, 2)
    assert parse_domain("poly:(0,0),(1,0),(0,1)") == TRIANGLE
    assert parse_domain("square:2", dim=1) == box((-2,), (2,))
    slab = parse_domain("slabdual:3", structure=XOR_I)
    assert slab.is_full and len(slab.vertices) == 4


@pytest.mark.parametrize("bad", ["square:0", "square:-1", "blob:3", "square", "poly:(0,0),(1)",
                                 "dim=2; vertices=(0,0),(1)"])
def test_bad_domain_specs(bad):
    with pytest.raises(ParseError):
        parse_domain(bad)


# ---------------------------------------------------------------- properties

@given(pointsets)
def test_hull_vertices_match_oracle(pts):
    p = convex_hull(pts, 2)
    assert sorted(tuple(int(c) for c in v) for v in p.vertices) == oracles.hull_vertices(pts)


@given(pointsets)
def test_lattice_points_match_oracle(pts):
    assert set(lattice_points(convex_hull(pts, 2))) == oracles.lattice_in_hull(pts)


@given(pointsets)
def test_volume_matches_oracle(pts):
    assert volume(convex_hull(pts, 2)) == oracles.polygon_area(pts)


@given(pointsets, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_support_function_is_max_over_points(pts, u):
    assert support_function(convex_hull(pts, 2), u) == max(x * u[0] + y * u[1] for x, y in pts)


@given(pointsets, st.lists(point2, min_size=1, max_size=4))
def test_minkowski_sum_is_hull_of_pairwise_sums(a, b):
    sums = [(p[0] + q[0], p[1] + q[1]) for p in a for q in b]
    assert minkowski_sum(convex_hull(a, 2), convex_hull(b, 2)) == convex_hull(sums, 2)


@given(st.lists(point2, min_size=3, max_size=6),
       st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=3))
def test_erosion_matches_set_definition(jpts, ipts):
    j = full_polygon(jpts)
    if j is None:
        return
    inside = oracles.lattice_in_hull(jpts)
    brute = {(x, y) for x in range(-9, 10) for y in range(-9, 10)
             if all((x + a, y + b) in inside for a, b in ipts)}
    assert set(lattice_points(erode(j, convex_hull(ipts, 2)))) == brute


@given(st.lists(point2, min_size=3, max_size=6), st.sampled_from([XOR_I, CROSS_I, [(2, 1)]]))
def test_dilation_contains_lattice_sums(jpts, ipts):
    j = full_polygon(jpts)
    if j is None:
        return
    ii = with_origin(ipts)
    dil = set(lattice_points(minkowski_sum(j, ii)))
    sj = set(lattice_points(j))
    assert sj | {(a[0] + b[0], a[1] + b[1]) for a in sj for b in lattice_points(ii)} <= dil


@given(st.lists(point2, min_size=3, max_size=6), st.integers(1, 5),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_quermass_laws(opts, k, v):
    o = full_polygon(opts)
    if o is None:
        return
    i = with_origin([(1, 2), (-1, 0)])
    base = quermass(i, o)
    assert quermass(i.scale(k), o) == pytest.approx(k * base, rel=1e-12, abs=1e-12)
    assert quermass(i.translate(v), o) == pytest.approx(base, rel=1e-12, abs=1e-9)
    assert quermass(minkowski_sum(i, box((0, 0), (1, 1))), o) >= base - 1e-12


@given(st.lists(point2, min_size=3, max_size=6), st.sampled_from([0.1, 0.5, 2.0]))
def test_ball_erosion_loses_at_most_r_times_perimeter(pts, r):
    j = full_polygon(pts)
    if j is None:
        return
    lost = float(volume(j) - volume(erode(j, Ball(r))))
    assert lost <= r * boundary_measure(j) + 1e-6


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)),
                min_size=4, max_size=7))
def test_three_dimensional_counts_match_brute_force(pts):
    p = convex_hull(pts, 3)
    if not p.is_full:
        return
    brute = sum(1 for x in range(-3, 4) for y in range(-3, 4) for z in range(-3, 4)
                if p.contains((x, y, z)))
    assert lattice_count(p) == brute
    for v in pts:
        assert p.contains(v)
    for f in p.facets:
        assert max(sum(a * b for a, b in zip(f.normal, v)) for v in pts) == f.offset


def test_three_dimensional_volume_of_simplex():
    p = convex_hull([(0, 0, 0), (3, 0, 0), (0, 2, 0), (0, 0, 1)])
    assert volume(p) == 1
