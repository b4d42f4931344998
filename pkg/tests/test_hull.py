"""Exact hull construction vs. independent brute-force oracles.

The oracle enumerates every d-subset of points, takes its spanning
hyperplane when affinely independent, and keeps it when all points lie
on one side; membership is then checked against that half-space list.
It shares no code with the beneath-beyond path.
"""
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from ramp.learning.hull import Polytope, convex_polytope, rref


# -- oracle -------------------------------------------------------------------


def oracle_halfspaces(points, dim):
    """All supporting hyperplanes spanned by input points (brute force)."""
    pts = sorted({tuple(Fraction(x) for x in p) for p in points})
    planes = set()
    for subset in combinations(pts, dim):
        plane = _span_plane(subset, dim)
        if plane is None:
            continue
        normal, offset = plane
        above = any(_dot(normal, p) > offset for p in pts)
        below = any(_dot(normal, p) < offset for p in pts)
        if above and below:
            continue
        if above:
            normal, offset = tuple(-n for n in normal), -offset
        planes.add((normal, offset))
        if not above and not below:
            planes.add((tuple(-n for n in normal), -offset))
    return planes


def _span_plane(subset, dim):
    base = subset[0]
    rows = [[x - b for x, b in zip(p, base)] for p in subset[1:]]
    reduced, pivots = rref([list(r) for r in rows])
    if len(pivots) != dim - 1:
        return None
    free = [c for c in range(dim) if c not in pivots][0]
    normal = [Fraction(0)] * dim
    normal[free] = Fraction(1)
    for k, pc in enumerate(pivots):
        normal[pc] = -reduced[k][free]
    return tuple(normal), _dot(normal, base)


def _dot(a, p):
    return sum(x * y for x, y in zip(a, p))


def oracle_contains(points, dim, query):
    """Membership via the brute-force half-space list plus the affine hull."""
    pts = sorted({tuple(Fraction(x) for x in p) for p in points})
    base = pts[0]
    rows = [[x - b for x, b in zip(p, base)] for p in pts[1:]]
    reduced, pivots = rref(rows)
    # query must sit in the affine hull
    qrow = [x - b for x, b in zip(query, base)]
    _, qpivots = rref(rows + [qrow])
    if len(qpivots) != len(pivots):
        return False
    if len(pivots) == 0:
        return tuple(query) == base
    if len(pivots) == 1:
        proj = [p[pivots[0]] for p in pts]
        return min(proj) <= query[pivots[0]] <= max(proj)
    projected = [tuple(p[c] for c in pivots) for p in pts]
    q = tuple(query[c] for c in pivots)
    for normal, offset in oracle_halfspaces(projected, len(pivots)):
        if _dot(normal, q) > offset:
            return False
    return True


# -- frozen examples ----------------------------------------------------------


class TestFrozenExamples:
    def test_single_point_is_all_equalities(self):
        poly = convex_polytope([(Fraction(10),)])
        assert poly.inequalities == ()
        assert poly.equalities == (((1,), 10),)
        assert poly.affine_dim == 0

    def test_two_points_interval(self):
        poly = convex_polytope([(7,), (10,)])
        assert poly.equalities == ()
        # canonical: x <= 10 and -x <= -7
        assert set(poly.inequalities) == {((1,), 10), ((-1,), -7)}

    def test_triangle_three_facets(self):
        poly = convex_polytope([(0, 0), (1, 0), (0, 1)])
        assert poly.equalities == ()
        assert set(poly.inequalities) == {
            ((-1, 0), 0),  # x >= 0
            ((0, -1), 0),  # y >= 0
            ((1, 1), 1),  # x + y <= 1
        }

    def test_point_in_3d(self):
        poly = convex_polytope([(1, 2, 3)])
        assert len(poly.equalities) == 3
        assert poly.contains((1, 2, 3))
        assert not poly.contains((1, 2, 4))

    def test_segment_embedded_in_2d(self):
        # points on the line y = 2x: one equality + interval facets
        poly = convex_polytope([(0, 0), (1, 2), (2, 4)])
        assert len(poly.equalities) == 1
        assert poly.contains((Fraction(1, 2), 1))
        assert not poly.contains((1, 1))
        assert not poly.contains((3, 6))

    def test_square_with_interior_and_edge_points(self):
        pts = [(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0), (2, 1)]
        poly = convex_polytope(pts)
        assert set(poly.inequalities) == {
            ((-1, 0), 0),
            ((0, -1), 0),
            ((1, 0), 2),
            ((0, 1), 2),
        }

    def test_unit_cube(self):
        pts = list(product([0, 1], repeat=3))
        poly = convex_polytope(pts)
        assert len(poly.inequalities) == 6
        assert poly.contains((Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)))
        assert not poly.contains((Fraction(3, 2), 0, 0))

    def test_degenerate_collinear_extension(self):
        # collinear horizon case: extend a hull edge by a point on its line
        pts = [(0, 0), (2, 0), (1, 1), (3, 0), (1, 0)]
        poly = convex_polytope(pts)
        assert poly.contains((Fraction(5, 2), Fraction(0)))
        assert not poly.contains((Fraction(5, 2), Fraction(1, 2)))


# -- property tests against the oracle ---------------------------------------


coord = st.integers(min_value=-4, max_value=4)


@settings(max_examples=120, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=12))
def test_membership_matches_oracle_2d(pts):
    poly = convex_polytope(pts)
    for q in product(range(-5, 6), repeat=2):
        assert poly.contains(tuple(map(Fraction, q))) == oracle_contains(pts, 2, q)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coord, coord, coord), min_size=1, max_size=10))
def test_membership_matches_oracle_3d(pts):
    poly = convex_polytope(pts)
    queries = {tuple(p) for p in pts}
    rng_queries = set(product((-3, -1, 0, 1, 3), repeat=3))
    for q in sorted(queries | rng_queries):
        assert poly.contains(tuple(map(Fraction, q))) == oracle_contains(pts, 3, q)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coord, coord, coord, coord), min_size=1, max_size=8))
def test_membership_matches_oracle_4d(pts):
    poly = convex_polytope(pts)
    queries = {tuple(p) for p in pts}
    extra = {tuple(int(x) for x in p) for p in [(0, 0, 0, 0), (1, 1, 1, 1), (-2, 1, 0, 3)]}
    for q in sorted(queries | extra):
        assert poly.contains(tuple(map(Fraction, q))) == oracle_contains(pts, 4, q)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(coord, coord), min_size=1, max_size=10),
    st.tuples(coord, coord),
)
def test_monotone_growth(pts, extra):
    small = convex_polytope(pts)
    big = convex_polytope(pts + [extra])
    for q in product(range(-4, 5), repeat=2):
        fq = tuple(map(Fraction, q))
        if small.contains(fq):
            assert big.contains(fq)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coord, coord, coord), min_size=1, max_size=9), st.randoms())
def test_order_independence(pts, rnd):
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    a = convex_polytope(pts)
    b = convex_polytope(shuffled)
    assert a.equalities == b.equalities
    assert a.inequalities == b.inequalities


def test_all_samples_satisfy_own_hull():
    pts = [(1, 2, 3), (4, 5, 6), (0, 0, 1), (2, 2, 2), (1, 1, 1), (3, 0, 0)]
    poly = convex_polytope(pts)
    for p in pts:
        assert poly.contains(tuple(map(Fraction, p)))
        assert poly.contains_float([float(x) for x in p])


def test_fractional_coordinates():
    pts = [(Fraction(3, 2), Fraction(3, 2)), (Fraction(-3, 2), Fraction(3, 2)), (0, 0)]
    poly = convex_polytope(pts)
    assert poly.contains((0, 1))
    assert not poly.contains((0, 2))
