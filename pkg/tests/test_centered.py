from fractions import Fraction

import pytest

from admissible import AdmissibleMatrix
from centered import CenteredFamily, aggregate_centered, case_of, enumerate_centered, isolated_rows
from errors import ParameterError
from partitions import is_unit_pattern


def test_k2_keeps_only_the_ones_column():
    terms = enumerate_centered(2, 1, 1)
    assert len(terms) == 1
    assert terms[0].matrix.entries == ((1,), (1,))
    assert terms[0].coefficient == 1
    assert terms[0].case_tag == "a"


def test_k4_main_terms_are_the_matchings():
    terms = enumerate_centered(4, 2, 1, main_only=True)
    assert len(terms) == 3
    assert all(is_unit_pattern(t.matrix) for t in terms)
    assert all(t.coefficient == 1 for t in terms)


def test_k6_main_terms_are_the_matchings():
    assert len(enumerate_centered(6, 3, 1, main_only=True)) == 15


def test_singleton_blocks_cancel():
    # every surviving unit pattern comes from a partition without singletons
    for term in aggregate_centered(5, CenteredFamily.AFFINE, main_only=True):
        sizes = [sum(1 for row in term.matrix.entries if row[j]) for j in range(term.n)]
        assert min(sizes) >= 2


def test_full_affine_family_aggregates_exact_coefficients():
    terms = aggregate_centered(3, CenteredFamily.AFFINE, d=5)
    assert terms
    assert all(isinstance(t.coefficient, Fraction) and t.coefficient != 0 for t in terms)
    assert all(1 <= t.n <= 2 for t in terms)


def test_congruence_family_needs_q_and_d():
    with pytest.raises(ParameterError):
        aggregate_centered(3, CenteredFamily.CONGRUENCE, d=5)
    with pytest.raises(ParameterError):
        aggregate_centered(3, CenteredFamily.CONGRUENCE, q=3)
    terms = aggregate_centered(3, CenteredFamily.CONGRUENCE, d=5, q=3, main_only=True)
    assert [t.matrix.entries for t in terms] == [((1,), (1,), (1,))]


def test_isolated_rows_and_cases():
    D = AdmissibleMatrix(((1, 0), (0, 1), (0, 1)), 1)
    assert isolated_rows(D) == [0]
    assert case_of(D) == ("b", 0)
    assert case_of(AdmissibleMatrix(((1,), (1,), (1,)), 1)) == ("a", 0)
    assert case_of(AdmissibleMatrix(((1, 0), (1, 0), (0, 1), (0, 1)), 1)) == ("a", 0)


def test_enumerate_centered_rejects_bad_n():
    with pytest.raises(ParameterError):
        enumerate_centered(3, 3, 1)
