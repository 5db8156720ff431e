"""The quadric surface pencil of a cubic threefold containing a plane.

A normalized threefold f = x0*Q0 + x1*Q1 is sliced by the hyperplanes through
the plane P = {x0 = x1 = 0}.  The slice at (s:t) is parametrized by
(u, x2, x3, x4) via x0 = s*u, x1 = t*u, and carries the residual quadric

    R_{s,t}(u, x2, x3, x4) = s*Q0(su, tu, x2, x3, x4) + t*Q1(su, tu, x2, x3, x4)

with f(su, tu, x) = u * R_{s,t}.  This module computes fiber matrices, the
sextic discriminant, rulings of fibers, and point counts / zeta data of the
genus-2 double cover that parametrizes the rulings.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .forms import BinaryForm, HomogeneousForm, det_form_matrix
from .gf import GF, field
from .linalg import det, kernel_basis, rank
from .projective import ProjectiveLine, ProjectivePoint, projective_reps, span


class NotGeneral(ValueError):
    """The input violates a generality hypothesis (flagged, with a reason)."""


# ---------------------------------------------------------------------------
# fibers
# ---------------------------------------------------------------------------


def _pencil_quadric_terms(nf, s: int, t: int) -> dict:
    """Terms of R_{s,t} in the fiber coordinates (u, x2, x3, x4)."""
    K = nf.K
    out: dict = {}
    for outer, Q in ((s, nf.Q0), (t, nf.Q1)):
        if outer == 0:
            continue
        for (e0, e1, e2, e3, e4), c in Q.terms.items():
            # x0 -> s*u, x1 -> t*u
            val = K.mul_(outer, c)
            if e0:
                val = K.mul_(val, K.pow_(s, e0))
            if e1:
                val = K.mul_(val, K.pow_(t, e1))
            if not val:
                continue
            key = (e0 + e1, e2, e3, e4)
            acc = K.add_(out.get(key, 0), val)
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
    return out


@dataclass(frozen=True)
class PencilFiber:
    """One member of the pencil: the quadric surface over (s:t)."""

    K: GF
    s: int
    t: int
    quadric: HomogeneousForm  # R_{s,t} in (u, x2, x3, x4)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Symmetric 4x4 matrix of the quadric (char != 2)."""
        K = self.K
        M = np.zeros((4, 4), dtype=np.int64)
        half = K.inverse(2 % K.p)
        for e, c in self.quadric.terms.items():
            idx = [i for i, v in enumerate(e) for _ in range(v)]
            i, j = idx
            if i == j:
                M[i, i] = c
            else:
                M[i, j] = M[j, i] = K.mul_(c, half)
        return M

    @cached_property
    def rank(self) -> int:
        return rank(self.K, self.matrix)

    @property
    def embedding(self) -> np.ndarray:
        """5x4 matrix sending fiber coordinates to ambient P^4."""
        iota = np.zeros((5, 4), dtype=np.int64)
        iota[0, 0] = self.s
        iota[1, 0] = self.t
        iota[2, 1] = iota[3, 2] = iota[4, 3] = 1
        return iota

    def ambient_point(self, pt) -> ProjectivePoint:
        u, x2, x3, x4 = (int(v) for v in pt)
        K = self.K
        return ProjectivePoint(K, (K.mul_(self.s, u), K.mul_(self.t, u), x2, x3, x4))

    def ambient_line(self, rows) -> ProjectiveLine:
        from .linalg import mat_mul

        return ProjectiveLine(self.K, mat_mul(self.K, np.array(rows, dtype=np.int64), self.embedding.T))

    def fiber_coords(self, pt: ProjectivePoint):
        """Inverse of ambient_point for points off P (u != 0) or on the base conic."""
        K = self.K
        x0, x1, x2, x3, x4 = pt.coords
        if self.s:
            if K.mul_(self.t, x0) != K.mul_(self.s, x1):
                raise ValueError("point is not on the fiber hyperplane")
            u = K.div_(x0, self.s)
        else:
            if x0 != 0:
                raise ValueError("point is not on the fiber hyperplane")
            u = K.div_(x1, self.t)
        return (u, x2, x3, x4)

    def contains(self, pt) -> bool:
        return self.quadric.evaluate(pt) == 0


def fiber_matrix(nf, s: int, t: int) -> PencilFiber:
    """The pencil member over (s:t) != (0:0)."""
    if s == 0 and t == 0:
        raise ValueError("(0:0) is not a point of the pencil base")
    quad = HomogeneousForm(nf.K, 4, 2, _pencil_quadric_terms(nf, s, t))
    return PencilFiber(nf.K, s, t, quad)


# ---------------------------------------------------------------------------
# the discriminant sextic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscriminantSextic:
    """disc(s,t) = det of the symbolic fiber matrix; degree 6."""

    form: BinaryForm

    @property
    def K(self) -> GF:
        return self.form.K

    @cached_property
    def reduced(self) -> bool:
        return self.form.is_squarefree()

    def embedded(self, L: GF) -> BinaryForm:
        emb = self.K.embedding_into(L)
        return BinaryForm(L, 6, [int(emb[c]) for c in self.form.coeffs])


def _symbolic_fiber_entries(nf) -> list[list[HomogeneousForm]]:
    """4x4 matrix entries as binary forms in (s, t)."""
    K = nf.K
    half = K.inverse(2 % K.p)
    # R as a dict over exponents (e_s, e_t, e_u, e_2, e_3, e_4)
    R: dict = {}
    for which, Q in ((0, nf.Q0), (1, nf.Q1)):
        for (e0, e1, e2, e3, e4), c in Q.terms.items():
            e_s = e0 + (1 if which == 0 else 0)
            e_t = e1 + (1 if which == 1 else 0)
            key = (e_s, e_t, e0 + e1, e2, e3, e4)
            acc = K.add_(R.get(key, 0), c)
            if acc:
                R[key] = acc
            else:
                R.pop(key, None)
    entries = [[dict() for _ in range(4)] for _ in range(4)]
    for (e_s, e_t, *fib), c in R.items():
        idx = [i for i, v in enumerate(fib) for _ in range(v)]
        i, j = idx
        val = c if i == j else K.mul_(c, half)
        st = (e_s, e_t)
        for a, b in ((i, j), (j, i)) if i != j else ((i, i),):
            acc = K.add_(entries[a][b].get(st, 0), val)
            if acc:
                entries[a][b][st] = acc
            else:
                entries[a][b].pop(st, None)
    out = []
    for i in range(4):
        row = []
        for j in range(4):
            deg = 3 if i == 0 and j == 0 else (2 if 0 in (i, j) else 1)
            row.append(HomogeneousForm(K, 2, deg, entries[i][j]))
        out.append(row)
    return out


def discriminant(nf) -> DiscriminantSextic:
    """Exact symbolic determinant of the fiber matrix, as a binary sextic."""
    D = det_form_matrix(nf.K, 2, _symbolic_fiber_entries(nf))
    if D.is_zero:
        raise NotGeneral("discriminant vanishes identically")
    assert D.degree == 6
    return DiscriminantSextic(BinaryForm.from_form(D))


# ---------------------------------------------------------------------------
# rulings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RulingClass:
    """One ruling of one fiber: a point of the curve C over the working field.

    ``index`` is 0 or 1 after canonical sorting of the (one or two) classes of
    the fiber; cone fibers have the single index 0.
    """

    K: GF  # the working field of the fiber parameter and the lines
    s: int
    t: int
    index: int
    is_cone: bool
    lines: tuple[ProjectiveLine, ...]  # ambient lines, canonically sorted

    def __repr__(self) -> str:
        kind = "cone" if self.is_cone else f"class {self.index}"
        return f"Ruling(({self.s}:{self.t}) {kind}, {len(self.lines)} lines over {self.K!r})"

    @property
    def key(self):
        return ((self.K.p, self.K.k), self.s, self.t, self.index)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, RulingClass) and self.key == other.key


def quadric_point_scan(K: GF, quadric: HomogeneousForm) -> list[tuple[int, ...]]:
    """All projective points of a quadric in its own coordinates."""
    from .projective import all_points_array

    pts = all_points_array(K, quadric.nvars - 1)
    vals = quadric.evaluate_batch(pts)
    return [tuple(int(x) for x in row) for row in pts[vals == 0]]


def lines_on_quadric(K: GF, quadric: HomogeneousForm, matrix: np.ndarray) -> list[tuple[tuple[int, ...], ...]]:
    """All lines (RREF row pairs, fiber coordinates) on a rank >= 3 quadric in P^3.

    Every line of the quadric meets every plane section, so it suffices to
    factor the tangent-cone conic at each point of one section.
    """
    r = rank(K, matrix)
    if r <= 2:
        raise NotGeneral(f"fiber matrix has rank {r} <= 2")
    lines: set = set()
    if r == 3:
        ker = kernel_basis(K, matrix)
        assert ker.shape[0] == 1
        vertex = tuple(int(x) for x in ker[0])
        for pt in quadric_point_scan(K, quadric):
            if pt != _normalize(K, vertex):
                from .linalg import rref

                rows, _ = rref(K, np.array([vertex, pt], dtype=np.int64))
                lines.add(tuple(tuple(int(x) for x in row) for row in rows))
        return sorted(lines)
    # smooth: walk one plane section
    section = _section_points(K, quadric)
    for y in section:
        for other in _tangent_directions(K, matrix, quadric, y):
            from .linalg import rref

            rows, _ = rref(K, np.array([y, other], dtype=np.int64))
            lines.add(tuple(tuple(int(x) for x in row) for row in rows))
    return sorted(lines)


def _normalize(K: GF, vec):
    from .projective import normalize_point

    return normalize_point(K, vec)


def _section_points(K: GF, quadric: HomogeneousForm) -> list[tuple[int, ...]]:
    """Points of the quadric on the plane u = 0 (first fiber coordinate)."""
    pts = [(0,) + rep for rep in projective_reps(K, 2)]
    return [p for p in pts if quadric.evaluate(p) == 0]


def _tangent_directions(K: GF, matrix: np.ndarray, quadric: HomogeneousForm, y) -> list[tuple[int, ...]]:
    """Second points spanning the (up to two) lines of the quadric through y."""
    row = np.array([_mat_vec_sym(K, matrix, y)], dtype=np.int64)
    tangent = kernel_basis(K, row)
    assert tangent.shape[0] == 3
    # rebase so y is the first basis vector of the tangent hyperplane
    basis = [list(y)]
    for cand in tangent:
        trial = np.array(basis + [list(cand)], dtype=np.int64)
        if rank(K, trial) == len(basis) + 1:
            basis.append([int(x) for x in cand])
        if len(basis) == 3:
            break
    assert len(basis) == 3
    c1, c2 = basis[1], basis[2]
    # Q(a*y + b*c1 + g*c2) = binary quadratic in (b, g): cross terms with y vanish
    q11 = quadric.evaluate(c1)
    q22 = quadric.evaluate(c2)
    both = quadric.evaluate([K.add_(a, b) for a, b in zip(c1, c2)])
    q12 = K.sub_(K.sub_(both, q11), q22)  # 2*B(c1,c2)
    conic = BinaryForm(K, 2, (q11, q12, q22))
    if conic.is_zero:
        # the whole tangent plane lies on the quadric: rank <= 2, excluded upstream
        raise NotGeneral("tangent plane contained in the quadric")
    out = []
    for (b, g), _mult in conic.roots():
        direction = [K.add_(K.mul_(b, u), K.mul_(g, v)) for u, v in zip(c1, c2)]
        out.append(tuple(direction))
    return out


def _mat_vec_sym(K: GF, M: np.ndarray, y) -> list[int]:
    out = []
    for i in range(M.shape[0]):
        acc = 0
        for j, yj in enumerate(y):
            acc = K.add_(acc, K.mul_(int(M[i, j]), int(yj)))
        out.append(acc)
    return out


def _lines_disjoint(K: GF, a, b) -> bool:
    stacked = np.array(list(a) + list(b), dtype=np.int64)
    return rank(K, stacked) == 4


def rulings_of_fiber(fiber: PencilFiber) -> list[RulingClass]:
    """Ruling classes of the fiber over its own field: 2 (split smooth),
    0 (smooth with no rational lines), or 1 (cone)."""
    K = fiber.K
    raw = lines_on_quadric(K, fiber.quadric, fiber.matrix)
    if fiber.rank == 3:
        ambient = tuple(sorted((fiber.ambient_line(rows) for rows in raw), key=lambda L: L.rows))
        return [RulingClass(K, fiber.s, fiber.t, 0, True, ambient)]
    if not raw:
        return []
    first = raw[0]
    same, other = [first], []
    for rows in raw[1:]:
        (same if _lines_disjoint(K, first, rows) else other).append(rows)
    # congruence sanity: partition is consistent (same-class lines pairwise disjoint)
    for group in (same, other):
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if not _lines_disjoint(K, group[i], group[j]):
                    raise AssertionError("ruling partition is not a congruence")
    for a in same:
        for b in other:
            if _lines_disjoint(K, a, b):
                raise AssertionError("lines in different rulings must meet")
    assert len(same) == len(other) == K.q + 1, "split smooth fiber carries q+1 lines per ruling"
    packs = []
    for group in (same, other):
        ambient = tuple(sorted((fiber.ambient_line(rows) for rows in group), key=lambda L: L.rows))
        packs.append(ambient)
    packs.sort(key=lambda pack: pack[0].rows)
    return [RulingClass(K, fiber.s, fiber.t, i, False, pack) for i, pack in enumerate(packs)]


def hyperelliptic_involution(c: RulingClass, classes_of_fiber: list[RulingClass]) -> RulingClass:
    """The other ruling of the same fiber (itself over a branch point)."""
    if c.is_cone:
        return c
    return next(d for d in classes_of_fiber if d.index != c.index)


# ---------------------------------------------------------------------------
# the curve C: operational points, hyperelliptic counts, zeta
# ---------------------------------------------------------------------------


def extended_threefold(nf, d: int):
    """The same threefold with coefficients embedded into F_{q^d}."""
    if d == 1:
        return nf
    L = field(nf.K.p, nf.K.k * d)
    return nf.embedded(L)


def operational_curve_points(nf, d: int = 1) -> list[RulingClass]:
    """All ruling classes over F_{q^d}: the operational model of C(F_{q^d})."""
    nfd = extended_threefold(nf, d)
    out = []
    for s, t in projective_reps(nfd.K, 1):
        out.extend(rulings_of_fiber(fiber_matrix(nfd, s, t)))
    return out


@dataclass(frozen=True)
class HyperellipticModel:
    """y^2 = disc(s,t) in weighted coordinates (1,1,3)."""

    disc: DiscriminantSextic

    @property
    def K(self) -> GF:
        return self.disc.K


def count_points_C(model: HyperellipticModel, k: int) -> int:
    """#C(F_{q^k}) = sum over P^1(F_{q^k}) of 1 + chi(disc(s,t))."""
    K = model.K
    L = field(K.p, K.k * k) if k > 1 else K
    sextic = model.disc.embedded(L) if k > 1 else model.disc.form
    total = 0
    for s, t in projective_reps(L, 1):
        total += 1 + L.chi_(sextic.evaluate(s, t))
    return total


@dataclass(frozen=True)
class ZetaData:
    N1: int
    N2: int
    c1: int
    c2: int
    h: int


def zeta(model: HyperellipticModel) -> ZetaData:
    """Zeta numerator coefficients and the class number h = #Pic^0(F_q)."""
    if not model.disc.reduced:
        raise NotGeneral("zeta requires a reduced discriminant (smooth C)")
    q = model.K.q
    N1 = count_points_C(model, 1)
    N2 = count_points_C(model, 2)
    p1 = q + 1 - N1
    p2 = q * q + 1 - N2
    c1 = -p1
    if (p1 * p1 - p2) % 2:
        raise AssertionError("power sums of a genus-2 curve have even p1^2 - p2")
    c2 = (p1 * p1 - p2) // 2
    h = 1 + c1 + c2 + q * c1 + q * q
    if c1 * c1 > 16 * q:
        raise AssertionError(f"Weil bound violated: |c1| = {abs(c1)} > 4*sqrt({q})")
    if h <= 0:
        raise AssertionError(f"class number must be positive, got {h}")
    return ZetaData(N1, N2, c1, c2, h)


def class_number_over_extension(z: ZetaData, q: int, k: int) -> int:
    """#Pic^0(F_{q^k}) = prod over inverse roots a_i of (1 - a_i^k), via resultant-free
    power-sum bookkeeping on the quartic numerator."""
    # Newton's identities on P(t) = 1 + c1 t + c2 t^2 + q c1 t^3 + q^2 t^4
    e = [1, -z.c1, z.c2, -q * z.c1, q * q]  # elementary symmetric in the inverse roots
    p = [0] * (4 * k + 1)  # power sums of the inverse roots
    for n in range(1, 4 * k + 1):
        acc = 0
        for i in range(1, min(n, 4) + 1):
            acc += (-1) ** (i - 1) * e[i] * (p[n - i] if n > i else 0)
        acc += (-1) ** (n - 1) * n * e[n] if n <= 4 else 0
        p[n] = acc
    # #Pic^0(F_{q^k}) = P_k(1) where P_k has inverse roots a_i^k; compute its
    # coefficients from the power sums p[k], p[2k], p[3k], p[4k]
    pk = [0, p[k], p[2 * k], p[3 * k], p[4 * k]]
    ek = [1]
    for n in range(1, 5):
        acc = 0
        for i in range(1, n + 1):
            acc += (-1) ** (i - 1) * ek[n - i] * pk[i]
        assert acc % n == 0
        ek.append(acc // n)
    return ek[0] - ek[1] + ek[2] - ek[3] + ek[4]


def match_models(nf, model: HyperellipticModel, depth: int = 2) -> bool:
    """Operational ruling counts agree with the hyperelliptic counts for k <= depth,
    and fiberwise degrees agree (2 off the branch locus, 1 on it)."""
    for k in range(1, depth + 1):
        ops = operational_curve_points(nf, k)
        if len(ops) != count_points_C(model, k):
            return False
        L = field(nf.K.p, nf.K.k * k) if k > 1 else nf.K
        sextic = model.disc.embedded(L) if k > 1 else model.disc.form
        per_fiber: dict = {}
        for c in ops:
            per_fiber[(c.s, c.t)] = per_fiber.get((c.s, c.t), 0) + 1
        for s, t in projective_reps(L, 1):
            expect = 1 + L.chi_(sextic.evaluate(s, t))
            if per_fiber.get((s, t), 0) != expect:
                return False
    return True
