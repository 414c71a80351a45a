from fractions import Fraction

import pytest

from admissible import (
    AdmissibleMatrix,
    Context,
    MatrixClass,
    Origin,
    affine_family,
    affine_lift,
    classify,
    count_N,
    enumerate_admissible,
    matrix_class,
)
from errors import NotAdmissibleError, ParameterError
from partitions import MainContext, enumerate_main_family


def _entries(matrices):
    return {m.entries for m in matrices}


def test_enumerate_single_column():
    found = enumerate_admissible(2, 1, 1, 1)
    assert len(found) == 4
    assert _entries(found) == {((1,), (0,)), ((1,), (1,)), ((1,), (-1,)), ((0,), (1,))}


def test_enumerate_full_rank_and_trivial():
    assert _entries(enumerate_admissible(2, 2, 1, 1)) == {((1, 0), (0, 1))}
    assert _entries(enumerate_admissible(1, 1, 1, 1)) == {((1,),)}


def test_enumerate_is_deterministic():
    first = [m.entries for m in enumerate_admissible(3, 2, 1, 1)]
    second = [m.entries for m in enumerate_admissible(3, 2, 1, 1)]
    assert first == second


def test_enumerate_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        enumerate_admissible(2, 3, 1, 1)
    with pytest.raises(ParameterError):
        enumerate_admissible(2, 1, 2, 1)


def test_enumerate_with_denominator_two_respects_gcd():
    for D in enumerate_admissible(2, 1, 2, 2):
        assert D.entries[D.pivot_rows[0]] == (2,)
    # (2, 0) and (2, 2) share the factor 2
    assert ((2,), (0,)) not in _entries(enumerate_admissible(2, 1, 2, 2))


def test_admissible_matrix_validation():
    with pytest.raises(NotAdmissibleError):
        AdmissibleMatrix(((2,), (4,)), 2)
    with pytest.raises(NotAdmissibleError):
        AdmissibleMatrix(((1, 0), (1, 1), (0, 1)), 1)
    with pytest.raises(NotAdmissibleError):
        AdmissibleMatrix(((0,), (0,)), 1)
    with pytest.raises(NotAdmissibleError):
        AdmissibleMatrix(((0, 0), (1, 0), (3, 1)), 1)
    D = AdmissibleMatrix(((0, 0), (1, 0), (0, 1), (3, 1)), 1)
    assert D.pivot_rows == (1, 2)
    assert AdmissibleMatrix.from_dict(D.to_dict()) == D


def test_count_N_examples():
    assert count_N(AdmissibleMatrix.identity(4)) == 1
    assert count_N(AdmissibleMatrix(((2,), (1,)), 2)) == 1
    assert count_N(AdmissibleMatrix(((1,), (1,)), 1)) == 1
    assert count_N(AdmissibleMatrix(((2, 0), (0, 2), (1, 1)), 2)) == 2


def test_count_N_methods_agree():
    for u in (2, 3):
        for D in enumerate_admissible(3, 2, u, u):
            assert count_N(D, method="direct") == count_N(D, method="smith")


def test_affine_lift_examples():
    assert affine_lift(AdmissibleMatrix(((1,), (1,)), 1)).matrix.entries == ((1, 0), (0, 1), (0, 1))
    assert affine_lift(AdmissibleMatrix(((1,), (0,)), 1)).matrix.entries == ((1, 0), (0, 1), (1, 0))
    assert affine_lift(AdmissibleMatrix(((1,),), 1)).matrix.entries == ((1, 0), (0, 1))


def test_affine_lift_multiplies_count_by_u():
    for u in (1, 2, 3):
        for D in enumerate_admissible(2, 1, u, u):
            lifted = affine_lift(D).matrix
            assert lifted.u == u
            assert lifted.r == D.r + 1
            assert count_N(lifted) == u * count_N(D)


@pytest.mark.slow
@pytest.mark.parametrize("rows", [1, 2, 3, 4])
def test_affine_lift_multiplies_count_by_u_on_the_whole_window(rows):
    for r in range(1, rows + 1):
        for u in (1, 2, 3):
            for D in enumerate_admissible(rows, r, u, 3):
                lifted = affine_lift(D).matrix
                assert lifted.k == rows + 1
                assert count_N(lifted) == u * count_N(D), D.entries


def test_matrix_class_examples():
    assert matrix_class(AdmissibleMatrix(((1, 0), (0, 1), (3, 1)), 1)) is MatrixClass.R1
    assert matrix_class(AdmissibleMatrix(((1, 0), (0, 1), (1, 1)), 1)) is MatrixClass.R2
    assert matrix_class(AdmissibleMatrix(((1, 0), (0, 1), (0, 1)), 1)) is MatrixClass.MAIN
    assert matrix_class(AdmissibleMatrix(((2,), (1,)), 2)) is MatrixClass.R1


def test_classify_rejects_non_affine_members():
    with pytest.raises(ParameterError):
        classify(AdmissibleMatrix(((1,), (3,)), 1), Context.AFFINE)
    assert classify(AdmissibleMatrix(((1,), (3,)), 1), Context.CONGRUENCE) is MatrixClass.R1


def test_affine_family_main_members_are_the_partitions():
    members = list(affine_family(3, d=5))
    assert members[0].origin is Origin.PRODUCT
    assert members[1].origin is Origin.DIAGONAL
    main = [m for m in members if classify(m.matrix, Context.AFFINE) is MatrixClass.MAIN]
    assert _entries(m.matrix for m in main) == _entries(enumerate_main_family(3, MainContext.AFFINE))
    assert all(m.coefficient == 1 for m in main)


def test_affine_family_coefficients():
    members = [m for m in affine_family(3, d=4, u_max=2, entry_bound=2) if m.origin is Origin.AFFINE_LIFT]
    for member in members:
        source = member.detail["source"]
        assert member.coefficient == Fraction(count_N(source) ** 4, source.u ** (4 * source.r))
    assert any(m.detail["u"] == 2 for m in members)


def test_affine_family_k1():
    (member,) = affine_family(1, d=3)
    assert member.matrix.entries == ((1,),)
