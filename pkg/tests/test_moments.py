from fractions import Fraction

import numpy as np
import pytest
from sympy.functions.combinatorial.numbers import stirling

from admissible import AdmissibleMatrix
from centered import CenteredFamily
from errors import ParameterError
from moments import (
    Truncation,
    affine_main_term,
    affine_moment,
    centered_moment_finite,
    centered_moment_limit,
    congruence_main_term,
    congruence_moment,
    poisson_joint_moment,
    term_integral,
)
from partitions import MainContext, enumerate_main_family
from regions import RegionFamily

V = Fraction(3)
MAIN_ONLY = Truncation(main_only=True)


def test_poisson_joint_moment_examples():
    assert poisson_joint_moment(1, [V]) == V
    assert poisson_joint_moment(1, [1, 2]) == 3
    assert poisson_joint_moment(Fraction(1, 2), [V, V]) == V / 2 + V * V / 4
    with pytest.raises(ParameterError):
        poisson_joint_moment(1, [2, 1])


def test_affine_main_term_is_the_poisson_moment():
    assert affine_main_term(2, [1, 5]) == 1 + 5
    assert affine_main_term(3, [V, V, V]) == V + 3 * V**2 + V**3
    for volumes in ([1, 2, 3], [Fraction(1, 2), 1, 1, 4]):
        assert affine_main_term(len(volumes), volumes) == poisson_joint_moment(1, volumes)


def test_congruence_main_term():
    assert congruence_main_term(2, [V, V], 3) == V + V**2
    assert congruence_main_term(1, [V], 5) == V
    assert congruence_main_term(2, [V, V], 2) == V / 2 + V**2 / 4
    assert congruence_main_term(3, [1, 2, 2], 2) == poisson_joint_moment(Fraction(1, 2), [1, 2, 2])
    with pytest.raises(ParameterError):
        congruence_main_term(2, [V, V], 2, symmetric=False)


def test_centered_moment_limit():
    assert centered_moment_limit([1], [4]) == 3
    assert centered_moment_limit([1], [3]) == 0
    assert centered_moment_limit([2, 5], [2, 2]) == 10
    assert centered_moment_limit([1], [6]) == 15
    assert centered_moment_limit([Fraction(1, 2), 1], [4, 0]) == Fraction(3, 4)


def test_term_integral_factorized():
    regions = RegionFamily.balls(2, [1, 2, 3])
    assert term_integral(AdmissibleMatrix.identity(3), regions).value == 6
    estimate = term_integral(AdmissibleMatrix(((1, 0), (0, 1), (0, 1)), 1), regions)
    assert estimate.value == 2
    assert estimate.exact
    assert estimate.stderr == 0.0


def test_term_integral_scaled_row():
    regions = RegionFamily.common_ball(2, V, 2)
    column = AdmissibleMatrix.from_columns([(1, 4)])
    assert term_integral(column, regions).value == V / 16


def test_term_integral_zero_row_needs_the_origin():
    D = AdmissibleMatrix(((1,), (0,)), 1)
    assert term_integral(D, RegionFamily.balls(2, [1, 1])).value == 1
    assert term_integral(D, RegionFamily.annuli(2, [0, 1], [1, 2])).value == 0


def test_term_integral_monte_carlo():
    # |y1|, |y2|, |y1 + y2| <= 1 in one dimension is a hexagon of area 3
    D = AdmissibleMatrix(((1, 0), (0, 1), (1, 1)), 1)
    regions = RegionFamily.common_ball(1, 2, 3)
    with pytest.raises(ParameterError):
        term_integral(D, regions)
    estimate = term_integral(D, regions, mc_budget=100_000, rng=np.random.default_rng(3))
    assert not estimate.exact
    assert abs(estimate.value - 3) <= 4 * estimate.stderr


def test_affine_moment_k2_is_exact():
    series = affine_moment(2, 6, RegionFamily.common_ball(6, V, 2))
    value, residual = series
    assert series.exact_value == V**2 + V
    assert value == pytest.approx(float(V**2 + V))
    assert residual == 0
    assert series.residual_kind == "bound"


def test_affine_moment_k1():
    series = affine_moment(1, 4, RegionFamily.balls(4, [V]))
    assert series.exact_value == V
    assert series.residual == 0


def test_affine_moment_k3_main_window():
    series = affine_moment(3, 10, RegionFamily.common_ball(10, V, 3), MAIN_ONLY)
    assert series.exact_value == V**3 + 3 * V**2 + V
    assert 0 < series.residual < float(V**3)
    assert series.residual_kind == "estimate"


def test_affine_moment_residual_diverges_at_small_d():
    series = affine_moment(3, 3, RegionFamily.common_ball(3, V, 3), MAIN_ONLY)
    assert series.residual_kind == "unbounded"


def test_affine_moment_rejects_k_above_d():
    with pytest.raises(ParameterError):
        affine_moment(4, 3, RegionFamily.common_ball(3, V, 4))


def test_congruence_moment_k1():
    series = congruence_moment(1, 3, 3, RegionFamily.balls(3, [V]))
    assert series.exact_value == V
    assert series.residual == 0


def test_congruence_moment_k2_main_part():
    series = congruence_moment(2, 5, 3, RegionFamily.common_ball(5, V, 2), MAIN_ONLY)
    assert series.value == pytest.approx(float(V**2 + V))
    assert 0 < series.residual < float(V)


def test_congruence_moment_k2_full_series_is_bounded():
    truncation = Truncation(t_max=20, ell_bound=20)
    series = congruence_moment(2, 5, 3, RegionFamily.common_ball(5, V, 2), truncation)
    assert series.value > float(V**2 + V)
    assert series.residual_kind == "bound"
    assert series.series["columns"] > 0


def test_congruence_moment_preconditions():
    with pytest.raises(ParameterError):
        congruence_moment(2, 2, 3, RegionFamily.common_ball(2, V, 2))
    with pytest.raises(ParameterError):
        congruence_moment(3, 3, 3, RegionFamily.common_ball(3, V, 3))
    with pytest.raises(ParameterError):
        congruence_moment(2, 5, 2, RegionFamily.balls(5, [V, V], symmetric=False))


def test_centered_k2_is_the_variance():
    series = centered_moment_finite(2, 6, RegionFamily.common_ball(6, V, 2))
    assert series.exact_value == V
    assert series.residual == 0


def test_centered_k3_matches_binomial_expansion():
    regions = RegionFamily.common_ball(10, V, 3)
    series = centered_moment_finite(3, 10, regions, MAIN_ONLY)
    third = affine_moment(3, 10, regions, MAIN_ONLY).exact_value
    second = affine_moment(2, 10, RegionFamily.common_ball(10, V, 2)).exact_value
    assert series.exact_value == V
    assert series.exact_value == third - 3 * V * second + 2 * V**3


def test_centered_k4_main_window():
    series = centered_moment_finite(4, 10, RegionFamily.common_ball(10, V, 4), MAIN_ONLY)
    assert series.exact_value == 3 * V**2 + V


def test_centered_k1_is_zero():
    series = centered_moment_finite(1, 5, RegionFamily.balls(5, [V]))
    assert series.value == 0
    assert series.exact_value == 0


def test_centered_congruence_main_window():
    series = centered_moment_finite(
        2, 5, RegionFamily.common_ball(5, V, 2), MAIN_ONLY, family=CenteredFamily.CONGRUENCE, q=3
    )
    assert series.exact_value == V


def test_centered_large_k_marks_the_skipped_classes():
    series = centered_moment_finite(6, 12, RegionFamily.common_ball(12, V, 6), MAIN_ONLY)
    assert series.exact_value == 15 * V**3 + 15 * V**2 + 10 * V**2 + V
    assert series.series["excluded_classes"] == "not enumerated"
    assert series.residual_kind == "estimate"


def test_truncation_validation():
    with pytest.raises(ParameterError):
        Truncation(u_max=0)
    with pytest.raises(ParameterError):
        Truncation(ell_bound=-1)
    assert Truncation().to_dict()["main_only"] is False


def _random_volumes(rng, k):
    numerators = rng.integers(1, 60, size=k)
    denominators = rng.integers(1, 7, size=k)
    return sorted(Fraction(int(a), int(b)) for a, b in zip(numerators, denominators))


def test_affine_main_term_equals_poisson_on_random_volumes():
    rng = np.random.default_rng(11)
    for case in range(100):
        k = 1 + case % 6
        volumes = _random_volumes(rng, k)
        assert affine_main_term(k, volumes) == poisson_joint_moment(1, volumes)


@pytest.mark.parametrize("k", range(1, 7))
@pytest.mark.parametrize("lam, v", [(1, 3), (Fraction(1, 2), Fraction(5, 3)), (2, Fraction(7, 4))])
def test_poisson_joint_moment_on_equal_volumes_is_a_stirling_sum(k, lam, v):
    mean = Fraction(lam) * Fraction(v)
    expected = sum(int(stirling(k, j)) * mean**j for j in range(1, k + 1))
    assert poisson_joint_moment(lam, [v] * k) == expected


def test_term_integral_method_switch():
    regions = RegionFamily.balls(2, [1, 2])
    identity = AdmissibleMatrix.identity(2)
    with pytest.raises(ParameterError):
        term_integral(identity, regions, method="simpson")
    with pytest.raises(ParameterError):
        term_integral(AdmissibleMatrix(((1, 0), (0, 1), (1, 1)), 1), RegionFamily.common_ball(1, 2, 3),
                      method="exact")
    with pytest.raises(ParameterError):
        term_integral(identity, regions, method="monte_carlo")
    assert not term_integral(identity, regions, mc_budget=100, method="monte_carlo").exact


OVERLAPPING_ANNULI = RegionFamily.annuli(2, [0, Fraction(1, 2), 1, Fraction(1, 5)], [2, 3, Fraction(5, 2), 3])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_exact_and_monte_carlo_integrals_agree_on_main_matrices(k):
    rng = np.random.default_rng(100 + k)
    for regions in (RegionFamily.balls(3, [1, 2, 2, 5][:k]), OVERLAPPING_ANNULI.restrict(range(k))):
        for M in enumerate_main_family(k, MainContext.AFFINE):
            exact = term_integral(M, regions)
            estimate = term_integral(M, regions, mc_budget=40_000, rng=rng, method="monte_carlo")
            assert exact.exact and not estimate.exact
            tolerance = 4 * estimate.stderr + 1e-9 * float(exact.value)
            assert abs(estimate.value - float(exact.value)) <= tolerance, M.entries


@pytest.mark.parametrize("d", range(2, 17))
@pytest.mark.parametrize("volume", [1, 10, 100])
def test_affine_second_moment_is_exact_in_every_dimension(d, volume):
    series = affine_moment(2, d, RegionFamily.common_ball(d, volume, 2))
    assert series.exact_value == volume**2 + volume
    assert series.residual == 0


def test_congruence_residual_shrinks_as_the_window_widens():
    regions = RegionFamily.common_ball(6, V, 2)
    windows = [(2, 4), (4, 8), (8, 16), (16, 32), (32, 64)]
    runs = [congruence_moment(2, 6, 3, regions, Truncation(t_max=t, ell_bound=ell)) for t, ell in windows]
    for series in runs:
        assert series.residual >= 0
        assert series.residual_kind == "bound"
    for narrow, wide in zip(runs, runs[1:]):
        assert wide.residual <= narrow.residual
        assert narrow.value <= wide.value
        # the narrow bound covers everything the wider window adds
        assert wide.value - narrow.value <= narrow.residual + 1e-12
