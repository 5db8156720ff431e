"""Multivariate homogeneous forms and binary forms with exact table arithmetic.

A :class:`HomogeneousForm` is a sparse dict mapping exponent tuples to nonzero
coefficient codes; a :class:`BinaryForm` of degree d stores the d+1
coefficients of s^(d-i) t^i.  Both are immutable in practice: every operation
returns a fresh object.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from . import kernels
from .gf import GF, field
from .linalg import inverse_matrix


class ArityError(ValueError):
    """Point length does not match the form's number of variables."""


# ---------------------------------------------------------------------------
# sparse exponent-dict arithmetic (shared by forms and the symbolic dets)
# ---------------------------------------------------------------------------


def _dict_add(K: GF, A: dict, B: dict) -> dict:
    out = dict(A)
    for e, c in B.items():
        s = K.add_(out.get(e, 0), c)
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _dict_mul(K: GF, A: dict, B: dict) -> dict:
    out: dict = {}
    for ea, ca in A.items():
        for eb, cb in B.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            s = K.add_(out.get(e, 0), K.mul_(ca, cb))
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _dict_neg(K: GF, A: dict) -> dict:
    return {e: K.neg_(c) for e, c in A.items()}


class HomogeneousForm:
    """Homogeneous polynomial of fixed degree in ``nvars`` variables."""

    __slots__ = ("K", "nvars", "degree", "terms", "_packed")

    def __init__(self, K: GF, nvars: int, degree: int, terms: dict):
        clean: dict = {}
        for e, c in terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars:
                raise ArityError(f"exponent {e} has arity {len(e)}, expected {nvars}")
            if any(x < 0 for x in e) or sum(e) != degree:
                raise ValueError(f"exponent {e} is not of total degree {degree}")
            c = int(c)
            if not 0 <= c < K.q:
                raise ValueError(f"coefficient code {c} outside field of order {K.q}")
            if c:
                clean[e] = c
        self.K = K
        self.nvars = nvars
        self.degree = degree
        self.terms = clean
        self._packed = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, K: GF, nvars: int, degree: int) -> "HomogeneousForm":
        return cls(K, nvars, degree, {})

    @classmethod
    def monomial(cls, K: GF, nvars: int, exps, coeff: int = 1) -> "HomogeneousForm":
        exps = tuple(exps)
        return cls(K, nvars, sum(exps), {exps: coeff})

    @classmethod
    def linear(cls, K: GF, coeffs) -> "HomogeneousForm":
        coeffs = list(coeffs)
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                terms[tuple(1 if j == i else 0 for j in range(n))] = int(c)
        return cls(K, n, 1, terms)

    # -- basics ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HomogeneousForm)
            and self.K is other.K
            and self.nvars == other.nvars
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(((self.K.p, self.K.k), self.nvars, self.degree, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"HomogeneousForm(deg {self.degree} in {self.nvars} vars, {len(self.terms)} terms over {self.K!r})"

    def coefficient(self, exps) -> int:
        return self.terms.get(tuple(exps), 0)

    def embedded(self, L) -> "HomogeneousForm":
        """The same form with coefficients pushed into the extension field L."""
        if L is self.K:
            return self
        emb = self.K.embedding_into(L)
        return HomogeneousForm(L, self.nvars, self.degree, {e: int(emb[c]) for e, c in self.terms.items()})

    # -- ring operations ------------------------------------------------------

    def plus(self, other: "HomogeneousForm") -> "HomogeneousForm":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        assert self.degree == other.degree and self.nvars == other.nvars
        return HomogeneousForm(self.K, self.nvars, self.degree, _dict_add(self.K, self.terms, other.terms))

    def minus(self, other: "HomogeneousForm") -> "HomogeneousForm":
        return self.plus(other.negated())

    def negated(self) -> "HomogeneousForm":
        return HomogeneousForm(self.K, self.nvars, self.degree, _dict_neg(self.K, self.terms))

    def scaled(self, c: int) -> "HomogeneousForm":
        if c == 0:
            return HomogeneousForm.zero(self.K, self.nvars, self.degree)
        return HomogeneousForm(self.K, self.nvars, self.degree, {e: self.K.mul_(v, c) for e, v in self.terms.items()})

    def times(self, other: "HomogeneousForm") -> "HomogeneousForm":
        assert self.nvars == other.nvars
        return HomogeneousForm(
            self.K, self.nvars, self.degree + other.degree, _dict_mul(self.K, self.terms, other.terms)
        )

    def derivative(self, i: int) -> "HomogeneousForm":
        out = {}
        K = self.K
        for e, c in self.terms.items():
            if e[i]:
                scaled = K.mul_(c, e[i] % K.p)
                if scaled:
                    out[e[:i] + (e[i] - 1,) + e[i + 1 :]] = scaled
        return HomogeneousForm(K, self.nvars, self.degree - 1, out)

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, point) -> int:
        point = tuple(int(x) for x in point)
        if len(point) != self.nvars:
            raise ArityError(f"point has {len(point)} coordinates, form has {self.nvars} variables")
        K = self.K
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, exp in zip(point, e):
                if exp:
                    term = K.mul_(term, K.pow_(x, exp))
            total = K.add_(total, term)
        return total

    def _pack(self):
        if self._packed is None:
            items = sorted(self.terms.items())
            exps = np.array([e for e, _ in items], dtype=np.uint8).reshape(len(items), self.nvars)
            coeffs = np.array([c for _, c in items], dtype=np.uint16)
            self._packed = (exps, coeffs)
        return self._packed

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Values at many points; points is (N, nvars) of codes."""
        points = np.ascontiguousarray(points, dtype=np.uint16)
        if points.shape[1] != self.nvars:
            raise ArityError(f"points have {points.shape[1]} coordinates, form has {self.nvars} variables")
        if self.is_zero:
            return np.zeros(points.shape[0], dtype=np.uint16)
        exps, coeffs = self._pack()
        K = self.K
        return kernels.eval_form_batch(K.add, K.mul, K.powers(self.degree), exps, coeffs, points)

    def gradient(self, point) -> list[int]:
        return [self.derivative(i).evaluate(point) for i in range(self.nvars)]

    # -- substitution ---------------------------------------------------------

    def substitute(self, M) -> "HomogeneousForm":
        """The form f(M y) in the y variables; M has shape (nvars, m)."""
        M = np.array(M, dtype=np.int64)
        assert M.shape[0] == self.nvars
        m = M.shape[1]
        K = self.K
        zero_exp = (0,) * m
        rows = []
        for i in range(self.nvars):
            row = {}
            for j in range(m):
                if M[i, j]:
                    row[tuple(1 if t == j else 0 for t in range(m))] = int(M[i, j])
            rows.append(row)
        out: dict = {}
        for e, c in self.terms.items():
            term = {zero_exp: c}
            for i, ei in enumerate(e):
                for _ in range(ei):
                    term = _dict_mul(K, term, rows[i])
                    if not term:
                        break
                if not term:
                    break
            out = _dict_add(K, out, term)
        return HomogeneousForm(K, m, self.degree, out)

    def restrict(self, basis_rows) -> "HomogeneousForm":
        """Restriction to the subspace spanned by basis rows (r x nvars)."""
        B = np.array(basis_rows, dtype=np.int64)
        return self.substitute(B.T)

    def specialize(self, values: dict[int, int]) -> "HomogeneousForm":
        """Substitute constants for the given variables; the rest survive.

        Only valid when the result is homogeneous in the surviving variables
        (e.g. the form is bihomogeneous and one block is fixed); asserted.
        """
        K = self.K
        keep = [i for i in range(self.nvars) if i not in values]
        out: dict = {}
        deg = None
        for e, c in self.terms.items():
            term = c
            for i, v in values.items():
                if e[i]:
                    term = K.mul_(term, K.pow_(v, e[i]))
            if not term:
                continue
            new_e = tuple(e[i] for i in keep)
            d = sum(new_e)
            assert deg is None or d == deg, "specialization is not homogeneous"
            deg = d
            s = K.add_(out.get(new_e, 0), term)
            if s:
                out[new_e] = s
            else:
                out.pop(new_e, None)
        if deg is None:
            deg = 0
        return HomogeneousForm(K, len(keep), deg, out)

    def proportionality(self, other: "HomogeneousForm") -> int | None:
        """Scalar c with self = c * other, or None (zero forms give 1)."""
        if self.is_zero and other.is_zero:
            return 1
        if self.is_zero or other.is_zero:
            return None
        if set(self.terms) != set(other.terms):
            return None
        K = self.K
        e0 = next(iter(self.terms))
        c = K.div_(self.terms[e0], other.terms[e0])
        for e, v in self.terms.items():
            if K.mul_(other.terms[e], c) != v:
                return None
        return c


def evaluate_form(f: HomogeneousForm, point) -> int:
    """Value of f at an affine tuple of element codes."""
    return f.evaluate(point)


def monomial_exponents(nvars: int, degree: int):
    """All exponent tuples of the given total degree, lexicographic."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def random_form(K: GF, nvars: int, degree: int, rng) -> HomogeneousForm:
    terms = {}
    for e in monomial_exponents(nvars, degree):
        c = K.random_element(rng)
        if c:
            terms[e] = c
    return HomogeneousForm(K, nvars, degree, terms)


def divide_by_linear(f: HomogeneousForm, ell) -> HomogeneousForm:
    """The exact quotient g with f = ell * g; ValueError when ell does not divide f.

    Works by an invertible change of coordinates that turns ell into a
    coordinate, where divisibility is visible monomial by monomial.
    """
    K = f.K
    ell = [int(x) for x in ell]
    if len(ell) != f.nvars:
        raise ArityError("linear form arity mismatch")
    try:
        i = next(j for j, c in enumerate(ell) if c)
    except StopIteration:
        raise ValueError("cannot divide by the zero form") from None
    C = np.eye(f.nvars, dtype=np.int64)
    C[i] = ell
    Cinv = inverse_matrix(K, C)
    in_y = f.substitute(Cinv)
    quot = {}
    for e, c in in_y.terms.items():
        if e[i] == 0:
            raise ValueError("form is not divisible by the given linear form")
        quot[e[:i] + (e[i] - 1,) + e[i + 1 :]] = c
    g_y = HomogeneousForm(K, f.nvars, f.degree - 1, quot)
    return g_y.substitute(C)


# ---------------------------------------------------------------------------
# binary forms
# ---------------------------------------------------------------------------


def _poly_trim(u: list[int]) -> list[int]:
    while u and u[-1] == 0:
        u.pop()
    return u


def _poly_divmod(K: GF, a: list[int], b: list[int]):
    a = list(a)
    b = _poly_trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = K.inverse(b[-1])
    quot = [0] * max(0, len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = K.mul_(a[i + len(b) - 1], inv_lead)
        if c:
            quot[i] = c
            for j, bj in enumerate(b):
                a[i + j] = K.sub_(a[i + j], K.mul_(c, bj))
    return quot, _poly_trim(a)


def _poly_gcd_monic(K: GF, a: list[int], b: list[int]) -> list[int]:
    a = _poly_trim(list(a))
    b = _poly_trim(list(b))
    while b:
        _, r = _poly_divmod(K, a, b)
        a, b = b, r
    if a:
        inv = K.inverse(a[-1])
        a = [K.mul_(c, inv) for c in a]
    return a


def _poly_eval(K: GF, u: list[int], x: int) -> int:
    acc = 0
    for c in reversed(u):
        acc = K.add_(K.mul_(acc, x), c)
    return acc


class BinaryForm:
    """Homogeneous binary form; coeffs[i] is the coefficient of s^(d-i) t^i."""

    __slots__ = ("K", "degree", "coeffs")

    def __init__(self, K: GF, degree: int, coeffs):
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != degree + 1:
            raise ValueError(f"need {degree + 1} coefficients, got {len(coeffs)}")
        if any(not 0 <= c < K.q for c in coeffs):
            raise ValueError("coefficient code outside the field")
        self.K = K
        self.degree = degree
        self.coeffs = coeffs

    @classmethod
    def from_form(cls, f: HomogeneousForm) -> "BinaryForm":
        assert f.nvars == 2
        coeffs = [0] * (f.degree + 1)
        for (e0, e1), c in f.terms.items():
            coeffs[e1] = c
        return cls(f.K, f.degree, coeffs)

    def to_form(self) -> HomogeneousForm:
        return HomogeneousForm(
            self.K, 2, self.degree, {(self.degree - i, i): c for i, c in enumerate(self.coeffs) if c}
        )

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryForm)
            and self.K is other.K
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash(((self.K.p, self.K.k), self.degree, self.coeffs))

    def __repr__(self) -> str:
        return f"BinaryForm(deg {self.degree}, coeffs {list(self.coeffs)} over {self.K!r})"

    def evaluate(self, s: int, t: int) -> int:
        K = self.K
        total = 0
        for i, c in enumerate(self.coeffs):
            if c:
                term = K.mul_(c, K.mul_(K.pow_(s, self.degree - i), K.pow_(t, i)))
            else:
                term = 0
            total = K.add_(total, term)
        return total

    def scaled(self, c: int) -> "BinaryForm":
        K = self.K
        return BinaryForm(K, self.degree, tuple(K.mul_(v, c) for v in self.coeffs))

    def times(self, other: "BinaryForm") -> "BinaryForm":
        K = self.K
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = K.add_(out[i + j], K.mul_(a, b))
        return BinaryForm(K, self.degree + other.degree, out)

    def derivative_s(self) -> "BinaryForm":
        K = self.K
        d = self.degree
        return BinaryForm(K, d - 1, [K.mul_(self.coeffs[i], (d - i) % K.p) for i in range(d)])

    def derivative_t(self) -> "BinaryForm":
        K = self.K
        d = self.degree
        return BinaryForm(K, d - 1, [K.mul_(self.coeffs[i + 1], (i + 1) % K.p) for i in range(d)])

    def dehomogenized(self) -> list[int]:
        """f(1, t) as an ascending coefficient list (possibly shorter than d+1)."""
        return _poly_trim(list(self.coeffs))

    def gcd(self, other: "BinaryForm") -> "BinaryForm":
        """Monic gcd as a binary form (degree 0 form when coprime)."""
        K = self.K
        if self.is_zero:
            return other._monic()
        if other.is_zero:
            return self._monic()
        a_t, a_u = self._tmult_and_unit()
        b_t, b_u = other._tmult_and_unit()
        a_s = self.degree - a_t - (len(a_u) - 1)
        b_s = other.degree - b_t - (len(b_u) - 1)
        g = _poly_gcd_monic(K, a_u, b_u)
        ms, mt = min(a_s, b_s), min(a_t, b_t)
        deg = ms + mt + len(g) - 1
        coeffs = [0] * (deg + 1)
        for j, c in enumerate(g):
            coeffs[mt + j] = c
        return BinaryForm(K, deg, coeffs)

    def _tmult_and_unit(self):
        """(multiplicity of t, ascending unit cofactor with nonzero ends)."""
        lo = next(i for i, c in enumerate(self.coeffs) if c)
        hi = max(i for i, c in enumerate(self.coeffs) if c)
        return lo, list(self.coeffs[lo : hi + 1])

    def _monic(self) -> "BinaryForm":
        if self.is_zero:
            return self
        lead = next(c for c in reversed(self.coeffs) if c)
        return self.scaled(self.K.inverse(lead))

    def is_squarefree(self) -> bool:
        """No repeated roots over the algebraic closure (constant forms count)."""
        if self.is_zero:
            return False
        if self.degree == 0:
            return True
        g = self.gcd(self.derivative_s()).gcd(self.derivative_t())
        return g.degree == 0

    def roots(self, extension: int = 1):
        """Roots in P^1(F_{q^extension}) as ((s, t) big-field codes, multiplicity).

        Finite points come first ordered by t code, the point (0, 1) last.
        """
        K = self.K
        L = K if extension == 1 else field(K.p, K.k * extension)
        emb = K.embedding_into(L)
        u = _poly_trim([int(emb[c]) for c in self.coeffs])
        out = []
        for x in range(L.q):
            if _poly_eval(L, u, x) == 0:
                mult = 0
                poly = u
                while poly and _poly_eval(L, poly, x) == 0:
                    poly, rem = _poly_divmod(L, poly, [L.neg_(x), 1])
                    assert not rem
                    mult += 1
                out.append(((1, x), mult))
        inf_mult = self.degree - (len(u) - 1)
        if inf_mult:
            out.append(((0, 1), inf_mult))
        return out

    def resultant(self, other: "BinaryForm") -> int:
        """Sylvester resultant of the two binary forms, as an element code."""
        from .linalg import det

        m, n = self.degree, other.degree
        size = m + n
        M = np.zeros((size, size), dtype=np.int64)
        for r in range(n):
            M[r, r : r + m + 1] = self.coeffs
        for r in range(m):
            M[n + r, r : r + n + 1] = other.coeffs
        return det(self.K, M)


# ---------------------------------------------------------------------------
# symbolic determinants of matrices with form entries
# ---------------------------------------------------------------------------


def det_form_matrix(K: GF, nvars: int, rows) -> HomogeneousForm:
    """Determinant of a square matrix of HomogeneousForms over the same ring.

    The matrix must be graded so the determinant is homogeneous (asserted).
    """
    n = len(rows)
    dicts = [[f.terms for f in row] for row in rows]

    def expand(row_ids, col_ids):
        if len(row_ids) == 1:
            return dicts[row_ids[0]][col_ids[0]]
        acc: dict = {}
        sign = 1
        for idx, r in enumerate(row_ids):
            entry = dicts[r][col_ids[0]]
            if entry:
                minor = expand(row_ids[:idx] + row_ids[idx + 1 :], col_ids[1:])
                prod = _dict_mul(K, entry, minor)
                if sign < 0:
                    prod = _dict_neg(K, prod)
                acc = _dict_add(K, acc, prod)
            sign = -sign
        return acc

    result = expand(tuple(range(n)), tuple(range(n)))
    degrees = {sum(e) for e in result}
    assert len(degrees) <= 1, "matrix grading did not produce a homogeneous determinant"
    degree = degrees.pop() if degrees else sum(rows[i][i].degree for i in range(n))
    return HomogeneousForm(K, nvars, degree, result)
