"""Projective layer: enumeration counts, spans, restriction, residual lines."""

import random
from itertools import islice

import numpy as np
import pytest

from cubicfano.forms import HomogeneousForm, random_form
from cubicfano.gf import field
from cubicfano.projective import (
    LinearSubspace,
    NotOnCubic,
    PlaneContained,
    ProjectiveLine,
    ProjectivePoint,
    all_points,
    count_lines,
    count_points,
    enumerate_lines,
    line_meets,
    line_through,
    pluecker_coordinates,
    residual_line,
    restrict_form,
    schubert_cell_dimensions,
    span,
)

# ---------------------------------------------------------------------------
# points and canonical forms
# ---------------------------------------------------------------------------


def test_point_normalization():
    K = field(5)
    assert ProjectivePoint(K, (2, 4, 0)).coords == (1, 2, 0)
    assert ProjectivePoint(K, (0, 3, 3)).coords == (0, 1, 1)
    with pytest.raises(ValueError):
        ProjectivePoint(K, (0, 0, 0))


def test_point_counts():
    assert len(all_points(field(3), 2)) == 13 == count_points(field(3), 2)
    assert len(all_points(field(5), 3)) == count_points(field(5), 3) == 156
    pts = all_points(field(7), 2)
    assert len(set(pts)) == len(pts) == 57


def test_line_rref_canonical():
    K = field(5)
    L1 = ProjectiveLine(K, ((1, 2, 3), (0, 1, 4)))
    L2 = ProjectiveLine(K, ((2, 4, 6 % 5), (0, 2, 8 % 5)))
    L3 = ProjectiveLine(K, ((1, 3, 2 % 5), (1, 4, 1)))  # same row space, mixed rows
    assert L1 == L2
    stacked = np.vstack([L1.matrix, L3.matrix])
    from cubicfano.linalg import rank

    if rank(K, stacked) == 2:
        assert L1 == L3


def test_line_points_and_containment():
    K = field(3)
    L = ProjectiveLine(K, ((1, 0, 1), (0, 1, 2)))
    pts = L.points()
    assert len(pts) == 4 == len(set(pts))
    for pt in pts:
        assert L.contains(pt)
    assert line_through(pts[0], pts[1]) == L


# ---------------------------------------------------------------------------
# line enumeration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "p,n,expected",
    [
        (3, 2, 13),
        (5, 2, 31),
        (7, 2, 57),
        (3, 3, 130),
        (5, 3, 806),
        (7, 3, 2850),
        (3, 4, 1210),
        (5, 4, 20306),
        (7, 4, 140050),
        (3, 5, 11011),
    ],
)
def test_enumerate_lines_counts(p, n, expected):
    K = field(p)
    assert count_lines(K, n) == expected
    seen = set()
    total = 0
    for line in enumerate_lines(K, n):
        total += 1
        if total <= 500:
            seen.add(line.rows)
            # canonical: re-normalizing is a no-op
            assert ProjectiveLine(K, line.rows) == line
    assert total == expected
    assert len(seen) == min(500, expected)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_cell_dimension_identity_p5(p):
    # closed-form check that the Schubert cells tile the (large) P^5 Grassmannian
    K = field(p)
    assert sum(K.q**d for d in schubert_cell_dimensions(5)) == count_lines(K, 5)
    first = list(islice(enumerate_lines(K, 5), 200))
    assert len(set(first)) == 200


def test_lines_in_p2_selfdual_count():
    # every pair of distinct points of P^2 spans one of the 13 lines over F_3
    K = field(3)
    lines = {line_through(a, b) for a in all_points(K, 2) for b in all_points(K, 2) if a != b}
    assert len(lines) == 13
    assert lines == set(enumerate_lines(K, 2))


# ---------------------------------------------------------------------------
# spans
# ---------------------------------------------------------------------------


def test_span_examples():
    K = field(5)
    L = ProjectiveLine(K, ((1, 0, 2, 0, 1), (0, 1, 3, 0, 0)))
    on_line = L.points()[2]
    assert span(K, L, on_line).dim == 1
    a, b = all_points(K, 4)[3], all_points(K, 4)[77]
    assert span(K, a, b).rows == line_through(a, b).rows
    skew = ProjectiveLine(K, ((0, 0, 1, 0, 4), (0, 0, 0, 1, 3)))
    got = span(K, L, skew)
    assert got.dim == 3


def test_span_point_membership():
    K = field(3)
    rng = random.Random(4)
    pts = random.Random(9).sample(all_points(K, 4), 3)
    S = span(K, *pts)
    for pt in pts:
        assert S.contains_point(pt)
    # spans are idempotent
    assert span(K, S).rows == S.rows


# ---------------------------------------------------------------------------
# restriction
# ---------------------------------------------------------------------------


def test_restrict_split_cubic_to_its_plane_is_zero():
    K = field(7)
    rng = random.Random(2)
    x0 = HomogeneousForm.linear(K, (1, 0, 0, 0, 0))
    x1 = HomogeneousForm.linear(K, (0, 1, 0, 0, 0))
    f = x0.times(random_form(K, 5, 2, rng)).plus(x1.times(random_form(K, 5, 2, rng)))
    P = LinearSubspace(K, ((0, 0, 1, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)))
    assert restrict_form(f, P).is_zero


def test_restrict_monomial_to_coordinate_plane():
    K = field(5)
    f = HomogeneousForm.monomial(K, 5, (1, 1, 1, 0, 0))
    P = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    got = restrict_form(f, P)
    assert got == HomogeneousForm.monomial(K, 3, (1, 1, 1))


def test_restrict_agrees_with_ambient_evaluation():
    K = field(5)
    rng = random.Random(12)
    f = random_form(K, 5, 3, rng)
    S = span(K, *random.Random(13).sample(all_points(K, 4), 3))
    assert S.dim == 2
    restricted = restrict_form(f, S)
    for coords in [(1, 0, 0), (0, 1, 0), (1, 2, 3), (4, 4, 1), (1, 1, 1), (2, 0, 3)]:
        ambient = S.embed_point(coords)
        # embed_point normalizes; compare via homogeneity-safe route
        lam_point = [0] * 5
        for c, row in zip(coords, S.rows):
            for j, rj in enumerate(row):
                lam_point[j] = K.add_(lam_point[j], K.mul_(c, rj))
        assert restricted.evaluate(coords) == f.evaluate(lam_point)
        assert (restricted.evaluate(coords) == 0) == (f.evaluate(ambient.coords) == 0)


# ---------------------------------------------------------------------------
# residual lines
# ---------------------------------------------------------------------------


def _plane_line(K, plane, ell):
    from cubicfano.projective import line_in_plane_from_linear_form

    return line_in_plane_from_linear_form(plane, ell)


def test_residual_line_split_product():
    K = field(7)
    # ambient P^4; plane x3 = x4 = 0; cubic = u*v*w on it (plus junk off the plane)
    plane = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    cubic = HomogeneousForm.monomial(K, 5, (1, 1, 1, 0, 0)).plus(HomogeneousForm.monomial(K, 5, (0, 0, 0, 3, 0)))
    L = _plane_line(K, plane, (1, 0, 0))
    M = _plane_line(K, plane, (0, 1, 0))
    res = residual_line(cubic, plane, L, M)
    assert res.line == _plane_line(K, plane, (0, 0, 1))
    assert res.multiplicity == 1


def test_residual_line_sum_case():
    K = field(5)
    plane = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    u = HomogeneousForm.linear(K, (1, 0, 0, 0, 0))
    v = HomogeneousForm.linear(K, (0, 1, 0, 0, 0))
    w = HomogeneousForm.linear(K, (1, 1, 1, 0, 0))
    cubic = u.times(v).times(w)
    L = _plane_line(K, plane, (1, 0, 0))
    M = _plane_line(K, plane, (0, 1, 0))
    res = residual_line(cubic, plane, L, M)
    assert res.line == _plane_line(K, plane, (1, 1, 1))
    assert res.multiplicity == 1


def test_residual_line_symmetric_and_multiplicity():
    K = field(7)
    plane = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    u = HomogeneousForm.linear(K, (1, 0, 0, 0, 0))
    v = HomogeneousForm.linear(K, (0, 1, 0, 0, 0))
    L = _plane_line(K, plane, (1, 0, 0))
    M = _plane_line(K, plane, (0, 1, 0))
    # double line: u * u * v -> dividing by u and v leaves u again
    cubic = u.times(u).times(v)
    res = residual_line(cubic, plane, L, M)
    assert res.line == L and res.multiplicity == 2
    swapped = residual_line(cubic, plane, M, L)
    assert swapped.line == res.line and swapped.multiplicity == 2
    # triple line: u^3 with L = M = {u = 0} (tangent-style double input)
    cubic3 = u.times(u).times(u)
    res3 = residual_line(cubic3, plane, L, L)
    assert res3.line == L and res3.multiplicity == 3


def test_residual_line_random_vanishing_oracle():
    K = field(7)
    rng = random.Random(99)
    plane = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    for _ in range(10):
        # build a cubic through two chosen coplanar lines: u*v*(random linear)
        ell = [K.random_element(rng) for _ in range(3)]
        if not any(ell):
            ell[2] = 1
        w = HomogeneousForm.linear(K, tuple(ell) + (0, 0))
        u = HomogeneousForm.linear(K, (1, 0, 0, 0, 0))
        v = HomogeneousForm.linear(K, (0, 1, 0, 0, 0))
        cubic = u.times(v).times(w)
        L = _plane_line(K, plane, (1, 0, 0))
        M = _plane_line(K, plane, (0, 1, 0))
        res = residual_line(cubic, plane, L, M)
        for pt in res.line.points():
            assert cubic.evaluate(pt.coords) == 0
        # symmetry
        assert residual_line(cubic, plane, M, L).line == res.line
        # product of the three linear forms equals the section up to scalar
        from cubicfano.projective import linear_form_cutting_line_in_plane

        ln = linear_form_cutting_line_in_plane(plane, res.line)
        recovered = (
            HomogeneousForm.linear(K, (1, 0, 0)).times(HomogeneousForm.linear(K, (0, 1, 0)))
        ).times(HomogeneousForm.linear(K, ln))
        section = restrict_form(cubic, plane)
        assert recovered.proportionality(section) is not None


def test_residual_line_errors():
    K = field(5)
    plane = LinearSubspace(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)))
    L = _plane_line(K, plane, (1, 0, 0))
    M = _plane_line(K, plane, (0, 1, 0))
    # cubic vanishing identically on the plane
    g = HomogeneousForm.monomial(K, 5, (0, 0, 0, 2, 1))
    with pytest.raises(PlaneContained):
        residual_line(g, plane, L, M)
    # cubic not through L
    w = HomogeneousForm.linear(K, (1, 1, 1, 0, 0))
    cubic = w.times(w).times(w)
    with pytest.raises(NotOnCubic):
        residual_line(cubic, plane, L, M)


# ---------------------------------------------------------------------------
# incidence
# ---------------------------------------------------------------------------


def test_line_meets_trivial_cases():
    K = field(5)
    L = ProjectiveLine(K, ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0)))
    M = ProjectiveLine(K, ((1, 0, 0, 0, 0), (0, 0, 1, 0, 0)))  # shares (1:0:0:0:0)
    assert line_meets(L, L)
    assert line_meets(L, M)


def test_line_meets_against_point_set_oracle():
    K = field(5)
    rng = random.Random(7)
    lines = list(enumerate_lines(K, 3))
    for _ in range(1000):
        L, M = rng.choice(lines), rng.choice(lines)
        predicted = line_meets(L, M)
        actual = bool(set(L.points()) & set(M.points()))
        assert predicted == actual


def test_pluecker_export():
    K = field(5)
    L = ProjectiveLine(K, ((1, 0, 2, 0, 1), (0, 1, 3, 0, 0)))
    pl = pluecker_coordinates(L)
    assert len(pl) == 10
    assert pl[0] == 1  # normalized
    # quadratic Pluecker relation p01 p23 - p02 p13 + p03 p12 = 0 on the first four indices
    p01, p02, p03, p12, p13, p23 = pl[0], pl[1], pl[2], pl[4], pl[5], pl[7]
    lhs = K.sub_(K.mul_(p01, p23), K.mul_(p02, p13))
    lhs = K.add_(lhs, K.mul_(p03, p12))
    assert lhs == 0
