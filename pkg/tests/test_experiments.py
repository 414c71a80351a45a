import io
import math
from fractions import Fraction

import numpy as np
import pytest

from errors import ParameterError
from Experiments import ExperimentConfig, ExperimentKind, Report, run_clt_trend, run_experiment
from Experiments.clt import CLTExperiment
from Experiments.crosscheck import CrosscheckExperiment
from Experiments.functional_clt import FunctionalCLTExperiment
from Experiments.poisson import PoissonExperiment
from moments import Truncation
from samplers import Space


def test_config_defaults_and_validation():
    cfg = ExperimentConfig(kind="clt", space="congruence", d=4, q=3)
    assert cfg.p_vec == (1, 0, 0, 0)
    assert cfg.count_zero
    assert not cfg.symmetric_pairs
    assert ExperimentConfig(kind="clt", space="linear", d=4).variance_scale == 2
    assert ExperimentConfig(kind="clt", space="congruence", d=4, q=2).intensity == Fraction(1, 2)
    with pytest.raises(ParameterError):
        ExperimentConfig(kind="clt", space="congruence", d=4)
    with pytest.raises(ParameterError):
        ExperimentConfig(kind="crosscheck", space="congruence", d=4, q=3, k_max=4)
    with pytest.raises(ParameterError):
        ExperimentConfig(kind="fclt", t_grid=(0.5, 0.25))
    with pytest.raises(ParameterError):
        ExperimentConfig(kind="clt", shells=(0.5, 0.75))


def test_report_checks():
    report = Report(kind="clt", config={})
    assert report.add_check("mean", 0.05, 0.0, 0.1)
    assert not report.add_check("ks", 0.2, 0.0, 0.1, informational=True)
    assert report.passed
    report.add_check("variance", math.nan, 1.0, 0.15)
    assert not report.passed
    assert [row["name"] for row in report.rows()] == ["mean", "ks", "variance"]


def test_clt_measure_on_the_square_lattice(z2):
    experiment = CLTExperiment(ExperimentConfig(kind="clt", space="affine", d=2, volume=20))
    assert experiment.measure(z2) == pytest.approx([1 / math.sqrt(20)])


def test_functional_clt_measure_on_the_square_lattice(z2):
    experiment = FunctionalCLTExperiment(ExperimentConfig(kind="fclt", space="affine", d=2, volume=20))
    assert experiment.measure(z2) == pytest.approx(np.array([0.0, -1.0, 1.0]) / math.sqrt(20))


def test_poisson_measure_on_the_square_lattice(z2):
    experiment = PoissonExperiment(ExperimentConfig(kind="poisson", space="linear", d=2, n_points=2))
    assert experiment.measure(z2) == pytest.approx([math.pi, math.pi, 0.0, 0.0])


def test_crosscheck_prediction_and_space():
    experiment = CrosscheckExperiment(ExperimentConfig(kind="crosscheck", space="affine", d=4, volume=3))
    assert experiment.predict(2).exact_value == 12
    with pytest.raises(ParameterError):
        CrosscheckExperiment(ExperimentConfig(kind="crosscheck", space="linear", d=4))


def test_experiment_kind_must_match():
    with pytest.raises(ParameterError):
        CLTExperiment(ExperimentConfig(kind="poisson", d=3))


def test_runs_are_reproducible():
    cfg = ExperimentConfig(kind="clt", space="affine", d=3, volume=5, samples=40, seed=8)
    first = run_experiment(cfg)
    second = run_experiment(cfg)
    assert first.to_dict() == second.to_dict()
    assert first.empirical["samples"] == 40
    assert set(first.checks) == {"mean", "variance", "m4", "ks"}


def test_worker_count_does_not_change_results():
    serial = ExperimentConfig(kind="poisson", space="linear", d=3, samples=300, seed=2, n_points=3)
    parallel = ExperimentConfig(kind="poisson", space="linear", d=3, samples=300, seed=2, n_points=3, workers=2)
    a, b = run_experiment(serial), run_experiment(parallel)
    assert a.empirical == b.empirical
    assert a.checks == b.checks


def test_samples_csv():
    experiment = FunctionalCLTExperiment(
        ExperimentConfig(kind="fclt", space="affine", d=3, volume=4, samples=5, seed=3)
    )
    with pytest.raises(ParameterError):
        experiment.write_samples_csv(io.StringIO())
    experiment.run()
    buffer = io.StringIO()
    experiment.write_samples_csv(buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "index,Z(1/4),Z(1/2),Z(1)"
    assert len(lines) == 6


def test_joint_shell_moments_are_reported():
    cfg = ExperimentConfig(kind="clt", space="affine", d=3, volume=6, samples=30, shells=(0.5, 0.5))
    report = run_experiment(cfg)
    assert "joint20" in report.empirical["joint"]
    assert report.empirical["joint"]["joint22"]["limit"] == pytest.approx(0.25)
    assert "variance" not in report.checks


def test_trend_needs_increasing_dimensions():
    cfg = ExperimentConfig(kind="clt", d=4)
    with pytest.raises(ParameterError):
        run_clt_trend(cfg, [5])
    with pytest.raises(ParameterError):
        run_clt_trend(cfg, [6, 5])


def _assert_clt_bands(report):
    assert abs(report.checks["mean"]["value"]) <= 0.1
    assert abs(report.checks["variance"]["value"] - 1) <= 0.15
    assert abs(report.checks["m4"]["value"] - 3) <= 0.6
    assert report.checks["ks"]["value"] <= 0.05
    for name in ("mean", "variance", "m4", "ks"):
        assert report.checks[name]["passed"], name


@pytest.mark.slow
def test_clt_acceptance_band():
    cfg = ExperimentConfig(kind="clt", space="affine", d=14, volume=100, samples=5000, seed=1, workers=4)
    _assert_clt_bands(run_experiment(cfg))


@pytest.mark.slow
@pytest.mark.parametrize("q", [3, 2])
def test_congruence_clt_acceptance_band(q):
    cfg = ExperimentConfig(kind="clt", space="congruence", q=q, d=14, volume=100, samples=5000, seed=1, workers=4)
    _assert_clt_bands(run_experiment(cfg))


@pytest.mark.slow
def test_clt_fourth_moment_approaches_three():
    cfg = ExperimentConfig(kind="clt", space="affine", d=8, volume=100, samples=5000, seed=4, workers=4)
    trend = run_clt_trend(cfg, [8, 11, 14])
    gaps = [trend.empirical["by_dimension"][str(d)]["gap"] for d in (8, 11, 14)]
    assert gaps == sorted(gaps, reverse=True)
    assert trend.checks["nonincreasing"]["passed"]
    assert abs(trend.empirical["by_dimension"]["14"]["m4"] - 3) <= 0.25 * 3
    assert trend.checks["final_m4"]["passed"]


@pytest.mark.slow
def test_functional_clt_covariance_is_brownian():
    cfg = ExperimentConfig(
        kind="fclt", space="affine", d=14, volume=100, t_grid=(0.25, 0.5, 1), samples=5000, seed=6, workers=4
    )
    report = run_experiment(cfg)
    covariance_checks = {name: check for name, check in report.checks.items() if name.startswith("cov[")}
    assert len(covariance_checks) == 6
    for name, check in covariance_checks.items():
        assert check["passed"], name
    assert report.checks["cov[1,1]"]["target"] == 1.0


@pytest.mark.slow
def test_affine_second_moment_is_exact_at_every_dimension():
    for d, volume, samples in ((4, 10, 4000), (7, 10, 4000), (10, 20, 4000)):
        cfg = ExperimentConfig(
            kind="crosscheck", space="affine", d=d, volume=volume, samples=samples, k_max=2, workers=4
        )
        report = run_experiment(cfg)
        assert report.checks["E[N^1]"]["passed"]
        assert report.checks["E[N^2]"]["passed"]
        assert report.predictions["2"]["residual"] == 0


@pytest.mark.slow
def test_congruence_second_moment_crosscheck():
    cfg = ExperimentConfig(
        kind="crosscheck", space="congruence", q=3, d=10, volume=20, samples=4000, k_max=2, workers=4,
        truncation=Truncation(t_max=50, ell_bound=200),
    )
    report = run_experiment(cfg)
    assert report.predictions["2"]["residual_kind"] == "bound"
    assert report.checks["E[N^1]"]["passed"]
    assert report.checks["E[N^2]"]["passed"]


@pytest.mark.slow
def test_poisson_gaps_have_the_limit_mean():
    cfg = ExperimentConfig(kind=ExperimentKind.POISSON, space=Space.LINEAR, d=10, samples=2000, workers=4)
    report = run_experiment(cfg)
    assert report.checks["gap_mean"]["passed"]


@pytest.mark.slow
def test_affine_poisson_joint_counts_and_gaps():
    cfg = ExperimentConfig(kind="poisson", space="affine", d=12, n_points=5, samples=5000, seed=9, workers=4)
    report = run_experiment(cfg)
    assert report.checks["E[N1N2]"]["target"] == 3.0
    assert report.checks["E[N1N2]"]["passed"]
    assert abs(report.checks["gap_mean"]["value"] - 1) <= 0.1
    assert report.checks["gap_mean"]["passed"]


@pytest.mark.slow
def test_q2_congruence_gaps_have_mean_two():
    cfg = ExperimentConfig(kind="poisson", space="congruence", q=2, d=12, n_points=5, samples=5000, seed=9, workers=4)
    report = run_experiment(cfg)
    assert report.predictions["gap_mean"] == 2.0
    assert abs(report.checks["gap_mean"]["value"] - 2) <= 0.2
    assert report.checks["gap_mean"]["passed"]


@pytest.mark.slow
def test_results_do_not_depend_on_the_worker_count():
    reports = [
        run_experiment(ExperimentConfig(kind="clt", space="affine", d=8, volume=30, samples=400, seed=3, workers=w))
        for w in (1, 4, 8)
    ]
    assert reports[0].empirical == reports[1].empirical == reports[2].empirical
    assert reports[0].checks == reports[1].checks == reports[2].checks
