"""Rationality witnesses over finite fields and the semidecision over Q."""

import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicfano.fano import InvalidInput
from cubicfano.gf import field
from cubicfano.pencil import NotGeneral
from cubicfano.projective import LinearSubspace
from cubicfano.rationality import (
    Degenerate,
    NeedsDifferentPrime,
    RationalQuadricForm,
    _q_derivative,
    _q_evaluate,
    _residue_solution_count,
    decide_over_finite_field,
    decide_over_rationals,
    hilbert_symbol,
    local_solvability,
    obstruction_confirmed_by_residues,
)
from cubicfano.forms import HomogeneousForm
from cubicfano.threefold import normalize, random_general_threefold


def seeded_example(p, seed):
    return random_general_threefold(field(p), random.Random(seed))


def diagonal_form(*entries):
    return RationalQuadricForm.from_entries(
        [[entries[i] if i == j else 0 for j in range(4)] for i in range(4)]
    )


# ---------------------------------------------------------------------------
# local solvability of rank-4 quadratic forms
# ---------------------------------------------------------------------------


def test_definite_form_is_obstructed_at_the_real_place():
    out = local_solvability(diagonal_form(1, 1, 1, 1))
    assert not out.solvable and out.obstruction == "real"
    assert obstruction_confirmed_by_residues(out.diagonal, out.obstruction)
    assert local_solvability(diagonal_form(-1, -2, -3, -1)).obstruction == "real"


def test_split_form_is_solvable_with_a_sparse_witness():
    out = local_solvability(diagonal_form(1, 1, -1, -1))
    assert out.solvable and out.obstruction is None
    assert out.witness == (1, 0, 1, 0)


def test_three_squares_minus_seven_is_obstructed_at_two():
    # integers congruent to 7 mod 8 are not sums of three squares, and the
    # obstruction is 2-adic
    assert all((a * a + b * b + c * c) % 8 != 7 for a in range(8) for b in range(8) for c in range(8))
    out = local_solvability(diagonal_form(1, 1, 1, -7))
    assert not out.solvable and out.obstruction == 2
    assert obstruction_confirmed_by_residues(out.diagonal, out.obstruction)


def test_solvable_witnesses_satisfy_the_form():
    hyperbolic = RationalQuadricForm.from_entries(
        [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    )
    for q in (hyperbolic, diagonal_form(1, 2, -3, 5), diagonal_form(2, -1, 7, -14)):
        out = local_solvability(q)
        assert out.solvable
        v = out.witness
        assert v is not None and any(v)
        assert sum(q.matrix[i][j] * v[i] * v[j] for i in range(4) for j in range(4)) == 0


def test_singular_form_raises_degenerate():
    with pytest.raises(Degenerate):
        local_solvability(diagonal_form(1, 2, 3, 0))


def test_diagonalization_is_a_congruence():
    rng = random.Random(11)
    for _ in range(25):
        M = [[Fraction(0)] * 4 for _ in range(4)]
        for i in range(4):
            for j in range(i, 4):
                M[i][j] = M[j][i] = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        q = RationalQuadricForm.from_entries(M)
        diag, C = q.diagonalization
        for i in range(4):
            for j in range(4):
                got = sum(C[a][i] * q.matrix[a][b] * C[b][j] for a in range(4) for b in range(4))
                assert got == (diag[i] if i == j else 0)


def _random_unimodular(rng):
    U = np.eye(4, dtype=np.int64)
    for _ in range(6):
        i, j = rng.sample(range(4), 2)
        E = np.eye(4, dtype=np.int64)
        E[i, j] = rng.choice([-2, -1, 1, 2])
        U = U @ E
    return U


def test_solvability_is_invariant_under_unimodular_congruence():
    rng = random.Random(4)
    samples = [diagonal_form(1, 1, 1, 1), diagonal_form(1, 1, 1, -7),
               diagonal_form(1, 2, -3, 5), diagonal_form(3, -1, 1, 1)]
    for q in samples:
        expected = local_solvability(q)
        for _ in range(4):
            U = _random_unimodular(rng)
            moved = [[sum(Fraction(U[a][i]) * q.matrix[a][b] * U[b][j] for a in range(4) for b in range(4))
                      for j in range(4)] for i in range(4)]
            got = local_solvability(RationalQuadricForm.from_entries(moved))
            assert got.solvable == expected.solvable
            assert got.obstruction == expected.obstruction


def test_scaling_the_form_preserves_solvability():
    for q, scale in ((diagonal_form(1, 1, 1, -7), 3), (diagonal_form(1, 2, -3, 5), -2)):
        scaled = RationalQuadricForm.from_entries(
            [[scale * v for v in row] for row in q.matrix]
        )
        assert local_solvability(scaled).solvable == local_solvability(q).solvable


# ---------------------------------------------------------------------------
# Hilbert symbols and residue counting
# ---------------------------------------------------------------------------


def test_hilbert_symbol_frozen_values():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(-1, -1, "real") == -1
    assert hilbert_symbol(2, 5, 5) == -1  # 2 is not a square mod 5
    assert hilbert_symbol(2, 7, 7) == 1  # 2 is a square mod 7
    assert hilbert_symbol(3, 3, 3) == -1  # x^2 = 3(1 - y^2) needs -1 a square
    assert hilbert_symbol(5, 7, 11) == 1  # units at an odd prime not dividing them
    with pytest.raises(InvalidInput):
        hilbert_symbol(0, 3, 5)


@given(st.sampled_from([2, 3, 5, 7, 11]),
       st.integers(-30, 30).filter(lambda v: v != 0),
       st.integers(-30, 30).filter(lambda v: v != 0),
       st.integers(-30, 30).filter(lambda v: v != 0))
@settings(max_examples=150, deadline=None)
def test_hilbert_symbol_is_bimultiplicative(p, a, b, c):
    assert hilbert_symbol(a, b * c, p) == hilbert_symbol(a, b, p) * hilbert_symbol(a, c, p)
    assert hilbert_symbol(a, b, p) == hilbert_symbol(b, a, p)


def test_hilbert_symbol_product_formula():
    # over all places the symbols multiply to 1
    rng = random.Random(9)
    for _ in range(40):
        a = rng.choice([v for v in range(-20, 21) if v])
        b = rng.choice([v for v in range(-20, 21) if v])
        places = {2, "real"}
        places.update(sympy.factorint(a * b).keys())
        places.discard(-1)
        prod = 1
        for p in places:
            prod *= hilbert_symbol(a, b, p)
        assert prod == 1


def test_residue_count_matches_brute_force():
    rng = random.Random(0)
    for _ in range(5):
        diag = [rng.choice([-7, -5, -3, -2, -1, 1, 2, 3, 5, 7]) for _ in range(4)]
        for mod in (8, 9, 25):
            brute = sum(
                1
                for v in itertools.product(range(mod), repeat=4)
                if sum(d * x * x for d, x in zip(diag, v)) % mod == 0
            )
            assert _residue_solution_count(diag, mod) == brute


def test_residue_recheck_rejects_isotropic_forms():
    assert not obstruction_confirmed_by_residues((1, 1, -1, -1), 2)
    assert not obstruction_confirmed_by_residues((1, 1, -1, -1), "real")
    assert not obstruction_confirmed_by_residues((1, 2, -3, 5), 3)


# ---------------------------------------------------------------------------
# finite fields: a witness always exists
# ---------------------------------------------------------------------------


def test_node_witness_over_f5():
    verdict = decide_over_finite_field(seeded_example(5, 44))
    assert verdict.kind == "Rational"
    assert verdict.witness == {"type": "node", "point": [0, 0, 1, 0, 1]}


def test_line_witness_when_the_node_scheme_has_no_rational_point():
    # the node scheme is a single closed point of degree 4, so the witness
    # must fall through to a rational line disjoint from the plane
    verdict = decide_over_finite_field(seeded_example(5, 9))
    assert verdict.kind == "Rational"
    assert verdict.witness == {
        "type": "line_disjoint_from_plane",
        "rows": [[1, 0, 0, 2, 0], [0, 1, 2, 1, 0]],
    }
    assert verdict.bounds["torsor_points"] == 17

    verdict = decide_over_finite_field(seeded_example(5, 10))
    assert verdict.witness["type"] == "line_disjoint_from_plane"


def test_finite_field_sweep_never_fails():
    rng = random.Random(99)
    kinds = set()
    for _ in range(20):
        verdict = decide_over_finite_field(random_general_threefold(field(5), rng))
        assert verdict.kind == "Rational"
        kinds.add(verdict.witness["type"])
    assert "node" in kinds and "line_disjoint_from_plane" in kinds
    for _ in range(10):
        verdict = decide_over_finite_field(random_general_threefold(field(3), rng))
        assert verdict.kind == "Rational"


def test_nonreduced_discriminant_is_refused():
    K = field(5)
    Q = HomogeneousForm(K, 5, 2, {(0, 0, 2, 0, 0): 1, (0, 0, 0, 1, 1): 1, (1, 1, 0, 0, 0): 1})
    x0 = HomogeneousForm.monomial(K, 5, (1, 0, 0, 0, 0))
    x1 = HomogeneousForm.monomial(K, 5, (0, 1, 0, 0, 0))
    cubic = x0.times(Q).plus(x1.times(Q))
    rows = np.zeros((3, 5), dtype=np.int64)
    rows[0, 2] = rows[1, 3] = rows[2, 4] = 1
    nf = normalize(cubic, LinearSubspace(K, rows))
    with pytest.raises(NotGeneral):
        decide_over_finite_field(nf)


# ---------------------------------------------------------------------------
# the semidecision over Q
# ---------------------------------------------------------------------------

NODE_EXAMPLE = {
    (1, 0, 2, 0, 0): 1, (1, 0, 0, 2, 0): -1,   # x0*(x2^2 - x3^2)
    (0, 1, 0, 2, 0): 1, (0, 1, 0, 0, 2): -1,   # x1*(x3^2 - x4^2)
    (2, 0, 0, 0, 1): 1, (2, 0, 1, 0, 0): -2, (0, 2, 0, 1, 0): -2,
}

LINE_EXAMPLE = {
    (0, 1, 0, 0, 2): 3, (0, 1, 0, 2, 0): 2, (0, 1, 1, 1, 0): 1, (0, 1, 2, 0, 0): 1,
    (0, 2, 0, 0, 1): 2, (0, 2, 0, 1, 0): -1, (0, 2, 1, 0, 0): 1, (0, 3, 0, 0, 0): -1,
    (1, 0, 0, 0, 2): 1, (1, 0, 0, 2, 0): 1, (1, 0, 2, 0, 0): 1,
    (1, 2, 0, 0, 0): -3, (2, 0, 0, 0, 1): -1, (2, 1, 0, 0, 0): -1, (3, 0, 0, 0, 0): -1,
}

DEFINITE_PENCIL_EXAMPLE = {
    (3, 0, 0, 0, 0): 1, (1, 0, 2, 0, 0): 1, (1, 0, 0, 2, 0): 1, (1, 0, 0, 0, 2): 1,
    (0, 3, 0, 0, 0): 1, (0, 1, 1, 1, 0): 1, (0, 1, 0, 0, 2): -1,
}

UNKNOWN_EXAMPLE = {
    (0, 1, 0, 0, 2): 2, (0, 1, 0, 2, 0): -2, (0, 1, 1, 1, 0): 2, (0, 1, 2, 0, 0): 2,
    (0, 2, 0, 1, 0): 2, (1, 0, 0, 0, 2): -1, (1, 0, 0, 1, 1): 1, (1, 0, 0, 2, 0): 1,
    (1, 0, 1, 0, 1): 2, (1, 0, 1, 1, 0): 2, (1, 1, 0, 0, 1): 1, (1, 1, 0, 1, 0): -1,
    (1, 1, 1, 0, 0): -1, (1, 2, 0, 0, 0): 2, (2, 0, 0, 0, 1): 1, (2, 0, 0, 1, 0): 2,
    (2, 0, 1, 0, 0): 1, (2, 1, 0, 0, 0): -1, (3, 0, 0, 0, 0): -1,
}


def test_visible_node_wins_with_the_expected_point():
    verdict = decide_over_rationals(NODE_EXAMPLE, height_bound=6)
    assert verdict.kind == "Rational"
    assert verdict.witness["type"] == "node"
    assert verdict.witness["point"] == [0, 0, 1, 1, 1]
    amb = tuple(verdict.witness["point"])
    terms = {e: Fraction(c) for e, c in NODE_EXAMPLE.items()}
    assert _q_evaluate(terms, amb) == 0
    assert all(_q_evaluate(_q_derivative(terms, i), amb) == 0 for i in range(5))


def test_planted_line_is_found_and_reported_in_reduced_form():
    verdict = decide_over_rationals(LINE_EXAMPLE, height_bound=4)
    assert verdict.kind == "Rational"
    assert verdict.witness == {
        "type": "line_disjoint_from_plane",
        "rows": [[1, 0, 1, 0, 0], [0, 1, 0, 1, 0]],
    }
    terms = {e: Fraction(c) for e, c in LINE_EXAMPLE.items()}
    a, b = (1, 0, 1, 0, 0), (0, 1, 0, 1, 0)
    for pt in (a, b, tuple(x + y for x, y in zip(a, b)), tuple(x - y for x, y in zip(a, b))):
        assert _q_evaluate(terms, pt) == 0


def test_definite_pencil_member_certifies_irrationality():
    verdict = decide_over_rationals(DEFINITE_PENCIL_EXAMPLE, height_bound=6)
    assert verdict.kind == "Irrational"
    assert verdict.certificate["pencil_member"] == [1, 0]
    assert verdict.certificate["place"] == "real"
    assert verdict.certificate["diagonal"] == [1, 1, 1, 1]
    assert obstruction_confirmed_by_residues(
        tuple(verdict.certificate["diagonal"]), verdict.certificate["place"]
    )


def test_generic_instance_is_honestly_unknown():
    verdict = decide_over_rationals(UNKNOWN_EXAMPLE, height_bound=4)
    assert verdict.kind == "Unknown"
    assert verdict.witness is None and verdict.certificate is None
    assert verdict.bounds["pencil_members_scanned"] == 24
    assert verdict.bounds["good_prime"] == 5


def test_bad_reduction_at_every_scanned_prime():
    shared = {}
    for e, c in {(0, 0, 2, 0, 0): 1, (0, 0, 0, 1, 1): 1, (1, 1, 0, 0, 0): 1}.items():
        for i in (0, 1):
            key = tuple(v + (1 if j == i else 0) for j, v in enumerate(e))
            shared[key] = shared.get(key, 0) + c
    with pytest.raises(NeedsDifferentPrime):
        decide_over_rationals(shared, height_bound=3)


def test_cubic_not_containing_the_plane_is_rejected():
    with pytest.raises(InvalidInput):
        decide_over_rationals({(0, 0, 3, 0, 0): 1, (1, 0, 2, 0, 0): 1}, height_bound=3)


TRANSFORMED_PLANE_ROWS = [(-1, 0, -1, 2, 0), (0, 0, -1, 1, 0), (0, 1, 0, 0, 0)]

TRANSFORMED_NODE_EXAMPLE = None  # computed lazily from NODE_EXAMPLE


def _transformed_example():
    global TRANSFORMED_NODE_EXAMPLE
    if TRANSFORMED_NODE_EXAMPLE is None:
        from cubicfano.rationality import _q_substitute

        V = [
            [1, 0, 1, 1, 0],
            [0, 0, 0, 0, -1],
            [0, 0, 1, 1, 0],
            [2, 0, 0, 1, 0],
            [0, 1, 0, 0, 1],
        ]
        moved = _q_substitute({e: Fraction(c) for e, c in NODE_EXAMPLE.items()}, V)
        TRANSFORMED_NODE_EXAMPLE = {e: int(c) for e, c in moved.items()}
    return TRANSFORMED_NODE_EXAMPLE


def test_arbitrary_plane_coordinates_are_normalized():
    # the same threefold with its plane moved off the standard position:
    # the witness comes back in the input coordinate system
    terms = _transformed_example()
    verdict = decide_over_rationals(terms, plane_rows=TRANSFORMED_PLANE_ROWS, height_bound=6)
    assert verdict.kind == "Rational"
    assert verdict.witness["point"] == [1, -1, 2, -3, 0]
    assert verdict.witness["normalized_point"] == [0, 0, 1, 1, 1]
    amb = tuple(verdict.witness["point"])
    q_terms = {e: Fraction(c) for e, c in terms.items()}
    assert _q_evaluate(q_terms, amb) == 0
    assert all(_q_evaluate(_q_derivative(q_terms, i), amb) == 0 for i in range(5))


def test_verdict_reports_serialize_to_json():
    for verdict in (
        decide_over_rationals(NODE_EXAMPLE, height_bound=4),
        decide_over_rationals(UNKNOWN_EXAMPLE, height_bound=3),
        decide_over_finite_field(seeded_example(3, 2)),
    ):
        blob = json.dumps(verdict.to_report(), sort_keys=True)
        assert json.loads(blob)["kind"] == verdict.kind
