"""Points, lines, and linear subspaces of P^n over a finite field.

Lines and subspaces are canonicalized to reduced row echelon form, so equality
is plain tuple comparison and enumeration can walk Schubert cells in a fixed
order.  Points are normalized so the first nonzero coordinate is 1.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, NamedTuple

import numpy as np

from .forms import HomogeneousForm, divide_by_linear
from .gf import GF
from .linalg import kernel_basis, rank, rref


class PlaneContained(ValueError):
    """The whole plane lies on the cubic; there is no residual line."""


class NotOnCubic(ValueError):
    """A claimed line does not lie on the cubic section."""


class InternalInconsistency(AssertionError):
    """Exact division produced something structurally impossible."""


def normalize_point(K: GF, vec) -> tuple[int, ...]:
    vec = [int(x) for x in vec]
    pivot = next((i for i, x in enumerate(vec) if x), None)
    if pivot is None:
        raise ValueError("zero vector does not define a projective point")
    inv = K.inverse(vec[pivot])
    return tuple(K.mul_(x, inv) for x in vec)


class ProjectivePoint:
    __slots__ = ("K", "coords")

    def __init__(self, K: GF, coords):
        self.K = K
        self.coords = normalize_point(K, coords)

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjectivePoint) and self.K is other.K and self.coords == other.coords

    def __hash__(self):
        return hash(((self.K.p, self.K.k), self.coords))

    def __repr__(self) -> str:
        return "Pt(" + ":".join(str(c) for c in self.coords) + ")"


def _canonical_rows(K: GF, rows, expect_rank: int | None = None) -> tuple[tuple[int, ...], ...]:
    R, _ = rref(K, rows)
    if expect_rank is not None and R.shape[0] != expect_rank:
        raise ValueError(f"expected rank {expect_rank}, got {R.shape[0]}")
    return tuple(tuple(int(x) for x in row) for row in R)


class ProjectiveLine:
    """A line in P^n: the row space of a canonical 2 x (n+1) RREF matrix."""

    __slots__ = ("K", "rows")

    def __init__(self, K: GF, rows, _trusted: bool = False):
        self.K = K
        if _trusted:
            self.rows = rows
        else:
            self.rows = _canonical_rows(K, rows, expect_rank=2)

    @property
    def n(self) -> int:
        return len(self.rows[0]) - 1

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjectiveLine) and self.K is other.K and self.rows == other.rows

    def __hash__(self):
        return hash(((self.K.p, self.K.k), self.rows))

    def __repr__(self) -> str:
        return f"Line{self.rows}"

    def points(self) -> list[ProjectivePoint]:
        """All q+1 rational points, parameter order (1:t) then (0:1)."""
        K = self.K
        a, b = self.rows
        out = [ProjectivePoint(K, [K.add_(x, K.mul_(t, y)) for x, y in zip(a, b)]) for t in range(K.q)]
        out.append(ProjectivePoint(K, b))
        return out

    def contains(self, pt: ProjectivePoint) -> bool:
        stacked = np.vstack([self.matrix, np.array(pt.coords, dtype=np.int64)])
        return rank(self.K, stacked) == 2

    def point_at(self, s: int, t: int) -> ProjectivePoint:
        K = self.K
        a, b = self.rows
        return ProjectivePoint(K, [K.add_(K.mul_(s, x), K.mul_(t, y)) for x, y in zip(a, b)])


class LinearSubspace:
    """An r-plane in P^n as a canonical (r+1) x (n+1) RREF matrix (rank r+1)."""

    __slots__ = ("K", "rows")

    def __init__(self, K: GF, rows):
        self.K = K
        self.rows = _canonical_rows(K, rows)
        if not self.rows:
            raise ValueError("empty span")

    @property
    def n(self) -> int:
        return len(self.rows[0]) - 1

    @property
    def dim(self) -> int:
        """Projective dimension."""
        return len(self.rows) - 1

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearSubspace) and self.K is other.K and self.rows == other.rows

    def __hash__(self):
        return hash(((self.K.p, self.K.k), self.rows))

    def __repr__(self) -> str:
        return f"Flat(dim {self.dim}){self.rows}"

    def contains_point(self, pt: ProjectivePoint) -> bool:
        stacked = np.vstack([self.matrix, np.array(pt.coords, dtype=np.int64)])
        return rank(self.K, stacked) == len(self.rows)

    def contains_line(self, line: ProjectiveLine) -> bool:
        stacked = np.vstack([self.matrix, line.matrix])
        return rank(self.K, stacked) == len(self.rows)

    def pivots(self) -> list[int]:
        return [next(i for i, x in enumerate(row) if x) for row in self.rows]

    def point_coords(self, pt: ProjectivePoint) -> tuple[int, ...]:
        """Coordinates of a point of S in the RREF basis (just the pivot slots)."""
        coords = tuple(pt.coords[p] for p in self.pivots())
        K = self.K
        recon = [0] * (self.n + 1)
        for c, row in zip(coords, self.rows):
            for j, rj in enumerate(row):
                recon[j] = K.add_(recon[j], K.mul_(c, rj))
        if tuple(recon) != pt.coords:
            raise ValueError("point does not lie in the subspace")
        return coords

    def embed_point(self, coords) -> ProjectivePoint:
        """The ambient point with the given subspace coordinates."""
        K = self.K
        out = [0] * (self.n + 1)
        for c, row in zip(coords, self.rows):
            if c:
                for j, rj in enumerate(row):
                    out[j] = K.add_(out[j], K.mul_(int(c), rj))
        return ProjectivePoint(K, out)

    def embed_line(self, inner: ProjectiveLine) -> ProjectiveLine:
        return ProjectiveLine(self.K, _matmul_rows(self.K, inner.matrix, self.matrix))

    def points(self) -> Iterator[ProjectivePoint]:
        for coords in projective_reps(self.K, self.dim):
            yield self.embed_point(coords)


def _matmul_rows(K: GF, A, B) -> np.ndarray:
    from .linalg import mat_mul

    return mat_mul(K, A, B)


def span(K: GF, *objects) -> LinearSubspace:
    """Smallest linear subspace containing all the given points/lines/flats."""
    rows = []
    for obj in objects:
        if isinstance(obj, ProjectivePoint):
            rows.append(obj.coords)
        elif isinstance(obj, (ProjectiveLine, LinearSubspace)):
            rows.extend(obj.rows)
        else:
            rows.append(tuple(int(x) for x in obj))
    if not rows:
        raise ValueError("span of nothing")
    return LinearSubspace(K, np.array(rows, dtype=np.int64))


def line_through(p: ProjectivePoint, q: ProjectivePoint) -> ProjectiveLine:
    assert p != q, "need two distinct points"
    return ProjectiveLine(p.K, np.array([p.coords, q.coords], dtype=np.int64))


def projective_reps(K: GF, n: int) -> Iterator[tuple[int, ...]]:
    """Normalized representatives of P^n(F_q): pivot ascending, tail lexicographic."""
    for pivot in range(n + 1):
        for tail in product(range(K.q), repeat=n - pivot):
            yield (0,) * pivot + (1,) + tail


def all_points(K: GF, n: int) -> list[ProjectivePoint]:
    return [ProjectivePoint(K, rep) for rep in projective_reps(K, n)]


def all_points_array(K: GF, n: int) -> np.ndarray:
    """All normalized representatives as a ((q^{n+1}-1)/(q-1), n+1) uint16 array."""
    return np.array(list(projective_reps(K, n)), dtype=np.uint16)


def count_points(K: GF, n: int) -> int:
    return (K.q ** (n + 1) - 1) // (K.q - 1)


def count_lines(K: GF, n: int) -> int:
    q = K.q
    return (q ** (n + 1) - 1) * (q**n - 1) // ((q**2 - 1) * (q - 1))


def enumerate_lines(K: GF, n: int) -> Iterator[ProjectiveLine]:
    """Every line of P^n exactly once, walking Schubert cells in RREF order."""
    assert n >= 2, "lines need at least a plane"
    for j0 in range(n):
        for j1 in range(j0 + 1, n + 1):
            free0 = [j for j in range(j0 + 1, n + 1) if j != j1]
            free1 = list(range(j1 + 1, n + 1))
            for values in product(range(K.q), repeat=len(free0) + len(free1)):
                row0 = [0] * (n + 1)
                row1 = [0] * (n + 1)
                row0[j0] = 1
                row1[j1] = 1
                for col, v in zip(free0, values):
                    row0[col] = v
                for col, v in zip(free1, values[len(free0) :]):
                    row1[col] = v
                yield ProjectiveLine(K, (tuple(row0), tuple(row1)), _trusted=True)


def schubert_cell_dimensions(n: int) -> list[int]:
    """Free-entry counts of the line cells of P^n (their q-powers sum to the line count)."""
    dims = []
    for j0 in range(n):
        for j1 in range(j0 + 1, n + 1):
            dims.append((n - j0 - 1) + (n - j1))
    return dims


def line_meets(L: ProjectiveLine, M: ProjectiveLine) -> bool:
    """Whether two lines intersect (always true when equal or in a plane)."""
    stacked = np.vstack([L.matrix, M.matrix])
    return rank(L.K, stacked) <= 3


def restrict_form(f: HomogeneousForm, S: LinearSubspace) -> HomogeneousForm:
    """The form pulled back to the RREF basis of S (ZeroForm when S lies on f)."""
    return f.restrict(S.matrix)


def linear_form_cutting_line_in_plane(plane: LinearSubspace, L: ProjectiveLine) -> tuple[int, ...]:
    """Coefficients (in plane coordinates) of the linear form vanishing on L."""
    K = plane.K
    inner = np.array([plane.point_coords(ProjectivePoint(K, row)) for row in L.rows], dtype=np.int64)
    ker = kernel_basis(K, inner)
    if ker.shape[0] != 1:
        raise InternalInconsistency("line inside plane must be cut by exactly one linear form")
    return tuple(int(x) for x in ker[0])


def line_in_plane_from_linear_form(plane: LinearSubspace, ell) -> ProjectiveLine:
    """The line of the plane cut out by a linear form in plane coordinates."""
    K = plane.K
    ker = kernel_basis(K, np.array([ell], dtype=np.int64))
    if ker.shape[0] != 2:
        raise InternalInconsistency("a nonzero ternary linear form cuts a line")
    ambient = _matmul_rows(K, ker, plane.matrix)
    return ProjectiveLine(K, ambient)


class Residual(NamedTuple):
    """Third line of a plane section, with its multiplicity in {L, M, N}."""

    line: ProjectiveLine
    multiplicity: int


def residual_line(cubic: HomogeneousForm, plane: LinearSubspace, L: ProjectiveLine, M: ProjectiveLine) -> Residual:
    """The third line of the plane section of a cubic through two known lines.

    The section factors as ell_L * ell_M * ell_N; returns N and the count of
    the three factors proportional to ell_N (1 = honest third line, 2 or 3 =
    degenerate configurations).  L = M is legal and divides by the square.
    """
    K = cubic.K
    if plane.dim != 2:
        raise ValueError("residual lines live in plane sections")
    section = restrict_form(cubic, plane)
    if section.is_zero:
        raise PlaneContained("plane lies entirely on the cubic")
    ell_L = linear_form_cutting_line_in_plane(plane, L)
    ell_M = linear_form_cutting_line_in_plane(plane, M)
    try:
        partial = divide_by_linear(section, ell_L)
    except ValueError as exc:
        raise NotOnCubic("first line is not on the cubic section") from exc
    try:
        residue = divide_by_linear(partial, ell_M)
    except ValueError as exc:
        raise NotOnCubic("second line is not on the cubic section") from exc
    if residue.is_zero or residue.degree != 1:
        raise InternalInconsistency("cubic divided by two linear forms must leave a linear form")
    ell_N = tuple(residue.coefficient(tuple(1 if j == i else 0 for j in range(3))) for i in range(3))
    line_N = line_in_plane_from_linear_form(plane, ell_N)
    n_norm = normalize_point(K, ell_N)
    multiplicity = sum(1 for ell in (ell_L, ell_M, ell_N) if normalize_point(K, ell) == n_norm)
    return Residual(line_N, multiplicity)


def pluecker_coordinates(line: ProjectiveLine) -> tuple[int, ...]:
    """Normalized Plucker coordinates (2x2 minors, i < j), for reports."""
    K = line.K
    a, b = line.rows
    minors = []
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            minors.append(K.sub_(K.mul_(a[i], b[j]), K.mul_(a[j], b[i])))
    return normalize_point(K, minors)
