"""Exact convex polytopes over rational points.

convex_polytope(points) returns conv(points) as linear equalities (the
affine hull) plus facet inequalities computed inside the affine hull's
coordinate system. All arithmetic is exact; the facet set is canonical
(integer-scaled, gcd-reduced, sorted), so it does not depend on point
order.

The facet enumeration is an incremental beneath-beyond construction over
a simplicial facet complex. Degenerate inputs (collinear/coplanar points)
are handled by treating facets whose hyperplane contains the new point as
visible, which keeps every cone facet full-dimensional.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from ramp.errors import RampError

Point = tuple[Fraction, ...]


class HullError(RampError):
    """Internal consistency check of the hull construction failed."""


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _canonical_eq(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[tuple[int, ...], int]:
    """Integer-scale an equality; sign fixed by first nonzero coefficient."""
    denom = 1
    for x in list(coeffs) + [rhs]:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in coeffs]
    irhs = int(rhs * denom)
    g = 0
    for x in ints + [irhs]:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
        irhs //= g
    lead = next((x for x in ints if x != 0), 0)
    if lead < 0:
        ints = [-x for x in ints]
        irhs = -irhs
    return tuple(ints), irhs


def _canonical_le(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[tuple[int, ...], int]:
    """Integer-scale an inequality a.x <= b; direction forbids sign flips."""
    denom = 1
    for x in list(coeffs) + [rhs]:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in coeffs]
    irhs = int(rhs * denom)
    g = 0
    for x in ints + [irhs]:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
        irhs //= g
    return tuple(ints), irhs


@dataclass(frozen=True)
class Polytope:
    """conv of the input points: {x : Ax = b, Cx <= d} with integer rows."""

    dim: int
    equalities: tuple[tuple[tuple[int, ...], int], ...]
    inequalities: tuple[tuple[tuple[int, ...], int], ...]
    affine_dim: int
    vertex_count: int

    def contains(self, point: Sequence[Fraction]) -> bool:
        for coeffs, rhs in self.equalities:
            if sum(c * x for c, x in zip(coeffs, point)) != rhs:
                return False
        for coeffs, rhs in self.inequalities:
            if sum(c * x for c, x in zip(coeffs, point)) > rhs:
                return False
        return True

    def contains_float(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        for coeffs, rhs in self.equalities:
            if abs(sum(c * x for c, x in zip(coeffs, point)) - rhs) > tol:
                return False
        for coeffs, rhs in self.inequalities:
            if sum(c * x for c, x in zip(coeffs, point)) > rhs + tol:
                return False
        return True


def convex_polytope(points: Iterable[Sequence[Fraction | int]]) -> Polytope:
    pts: list[Point] = sorted({tuple(Fraction(x) for x in p) for p in points})
    if not pts:
        raise ValueError("convex_polytope needs at least one point")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise ValueError("points of mixed dimension")

    base = pts[0]
    diffs = [[x - b for x, b in zip(p, base)] for p in pts[1:]]
    basis, pivots = rref(diffs)
    d_aff = len(pivots)

    # affine-hull equalities: one per non-pivot coordinate
    equalities = []
    pivot_pos = {c: k for k, c in enumerate(pivots)}
    for c in range(dim):
        if c in pivot_pos:
            continue
        coeffs = [Fraction(0)] * dim
        coeffs[c] = Fraction(1)
        for k, pc in enumerate(pivots):
            coeffs[pc] = -basis[k][c]
        rhs = sum(a * x for a, x in zip(coeffs, base))
        equalities.append(_canonical_eq(coeffs, rhs))
    equalities.sort()

    if d_aff == 0:
        return Polytope(dim, tuple(equalities), (), 0, 1)

    projected = [tuple(p[c] for c in pivots) for p in pts]
    if d_aff == 1:
        lo = min(q[0] for q in projected)
        hi = max(q[0] for q in projected)
        ineqs = []
        coeffs_hi = [Fraction(0)] * dim
        coeffs_hi[pivots[0]] = Fraction(1)
        ineqs.append(_canonical_le(coeffs_hi, hi))
        coeffs_lo = [Fraction(0)] * dim
        coeffs_lo[pivots[0]] = Fraction(-1)
        ineqs.append(_canonical_le(coeffs_lo, -lo))
        ineqs.sort()
        n_vertices = len({q for q in projected if q[0] in (lo, hi)})
        return Polytope(dim, tuple(equalities), tuple(ineqs), 1, n_vertices)

    facets, vertices = _beneath_beyond(projected, d_aff)
    ineqs = set()
    for normal, offset in facets:
        coeffs = [Fraction(0)] * dim
        for k, pc in enumerate(pivots):
            coeffs[pc] = normal[k]
        ineqs.add(_canonical_le(coeffs, offset))
    return Polytope(dim, tuple(equalities), tuple(sorted(ineqs)), d_aff, len(vertices))


def _hyperplane(points: list[Point], d: int) -> tuple[Point, Fraction]:
    """Normal and offset of the hyperplane through d affinely independent points."""
    base = points[0]
    rows = [[x - b for x, b in zip(p, base)] for p in points[1:]]
    reduced, pivots = rref(rows)
    if len(pivots) != d - 1:
        raise HullError("degenerate facet simplex")
    free = [c for c in range(d) if c not in pivots][0]
    normal = [Fraction(0)] * d
    normal[free] = Fraction(1)
    for k, pc in enumerate(pivots):
        normal[pc] = -reduced[k][free]
    offset = sum(n * x for n, x in zip(normal, base))
    return tuple(normal), offset


def _beneath_beyond(points: list[Point], d: int) -> tuple[list[tuple[Point, Fraction]], set[int]]:
    """Facets of the full-dimensional hull of `points` in dimension d >= 2."""
    # initial affinely independent simplex
    simplex = [0]
    rows: list[list[Fraction]] = []
    for i in range(1, len(points)):
        candidate = rows + [[x - b for x, b in zip(points[i], points[0])]]
        reduced, pivots = rref(candidate)
        if len(pivots) > len(rows):
            rows = [list(r) for r in reduced]
            simplex.append(i)
            if len(simplex) == d + 1:
                break
    if len(simplex) != d + 1:
        raise HullError("points do not span the expected dimension")

    interior = tuple(
        sum(points[i][c] for i in simplex) / Fraction(d + 1) for c in range(d)
    )

    def oriented(vertex_ids: frozenset[int]) -> tuple[Point, Fraction]:
        normal, offset = _hyperplane([points[i] for i in sorted(vertex_ids)], d)
        side = sum(n * x for n, x in zip(normal, interior))
        if side > offset:
            normal = tuple(-n for n in normal)
            offset = -offset
        elif side == offset:
            raise HullError("interior reference lies on a facet")
        return normal, offset

    facets: dict[frozenset[int], tuple[Point, Fraction]] = {}
    for omit in simplex:
        ids = frozenset(v for v in simplex if v != omit)
        facets[ids] = oriented(ids)

    for i in range(len(points)):
        if i in simplex:
            continue
        p = points[i]
        strict = []
        touching = []
        for ids, (normal, offset) in facets.items():
            value = sum(n * x for n, x in zip(normal, p))
            if value > offset:
                strict.append(ids)
            elif value == offset:
                touching.append(ids)
        if not strict:
            continue  # inside or on the boundary
        visible = strict + touching
        ridge_count: dict[frozenset[int], int] = {}
        for ids in visible:
            for v in ids:
                ridge = ids - {v}
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        for ids in visible:
            del facets[ids]
        for ridge, count in ridge_count.items():
            if count == 1:
                new_ids = ridge | {i}
                facets[new_ids] = oriented(new_ids)
            elif count > 2:
                raise HullError("non-manifold ridge in hull update")

    _verify(points, facets, d)
    vertices = set()
    for ids in facets:
        vertices |= ids
    return list(facets.values()), vertices


def _verify(points: list[Point], facets: dict[frozenset[int], tuple[Point, Fraction]], d: int) -> None:
    ridge_count: dict[frozenset[int], int] = {}
    for ids in facets:
        for v in ids:
            ridge = ids - {v}
            ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
    if any(c != 2 for c in ridge_count.values()):
        raise HullError("hull boundary is not closed")
    for normal, offset in facets.values():
        for p in points:
            if sum(n * x for n, x in zip(normal, p)) > offset:
                raise HullError("input point outside computed hull")
