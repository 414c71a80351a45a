import pytest

import intmath
from errors import ParameterError


def test_smith_decomposition_diagonalizes():
    a = [[2, 0], [0, 2], [1, 1]]
    u, s, v = intmath.smith_decomposition(a)
    assert intmath.mat_mul(intmath.mat_mul(u, a), v) == s
    assert all(s[i][j] == 0 for i in range(3) for j in range(2) if i != j)
    assert abs(intmath.determinant(u)) == 1
    assert abs(intmath.determinant(v)) == 1


def test_invariant_factors():
    assert intmath.invariant_factors([[2, 0], [0, 2], [1, 1]]) == [1, 2]
    assert intmath.invariant_factors([[2], [1]]) == [1]
    assert intmath.invariant_factors([[2, 0], [0, 4]]) == [2, 4]


def test_column_hnf_reduces_earlier_columns():
    hnf, pivots = intmath.column_hnf([[1, 0], [3, 2]])
    assert pivots == [0, 1]
    assert hnf == [[1, 0], [1, 2]]


def test_column_hnf_drops_dependent_columns():
    hnf, pivots = intmath.column_hnf([[2, 4], [1, 2]])
    assert pivots == [0]
    assert hnf == [[2], [1]]


def test_complete_to_unimodular():
    for row in ([3, 5], [2, 3, 4], [0, 0, 1], [6, 10, 15]):
        gamma, gamma_inv = intmath.complete_to_unimodular(row)
        assert gamma[0] == row
        assert intmath.determinant(gamma) == 1
        assert intmath.mat_mul(gamma, gamma_inv) == intmath.identity(len(row))


def test_complete_to_unimodular_rejects_imprimitive_rows():
    with pytest.raises(ParameterError):
        intmath.complete_to_unimodular([2, 4])
    with pytest.raises(ParameterError):
        intmath.complete_to_unimodular([1])


def test_lift_primitive():
    w = intmath.lift_primitive([2, 2], 3)
    assert intmath.gcd_all(w) == 1
    assert [x % 3 for x in w] == [2, 2]
    w = intmath.lift_primitive([3, 0, 0], 4)
    assert intmath.gcd_all(w) == 1
    assert [x % 4 for x in w] == [3, 0, 0]
    with pytest.raises(ParameterError):
        intmath.lift_primitive([0, 0], 3)


def test_extended_gcd():
    g, x, y = intmath.extended_gcd(240, 46)
    assert g == 2
    assert 240 * x + 46 * y == 2
