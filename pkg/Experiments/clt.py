"""Central limit experiments for the normalized lattice point count Z_d"""

import itertools
import logging
import math

import numpy as np

import config
from centered import CenteredFamily
from errors import ParameterError
from lattice import nested_counts
from moments import Truncation, centered_moment_finite, centered_moment_limit
from regions import RegionFamily, radius_for_volume
from running_stats import ks_statistic
from samplers import Space

from Experiments.experiment import Experiment, ExperimentKind, Report, mean_and_stderr

logger = logging.getLogger(__name__)

FINITE_ORDERS = (2, 3, 4)
# u = 1 window on the unit-pattern family; ell = -1 carries the q = 2 sign column
PREDICTION_TRUNCATION = Truncation(u_max=1, t_max=1, ell_bound=1, entry_bound=1, main_only=True)


class CLTExperiment(Experiment):
    """
    Z_d = (#(L in S_d) - phi) / sqrt(s * phi) with s = 2 for origin-symmetric point sets.

    With shells configured the ball S_d is cut into consecutive annuli of volumes
    c_i * phi and one Z_i = (N_i - c_i phi) / sqrt(s * phi) is measured per annulus.
    """

    kind = ExperimentKind.CLT
    moment_order = config.CLT_MOMENT_ORDER

    def __init__(self, experiment_config):
        super().__init__(experiment_config)
        phi = self.config.volume
        d = self.config.d
        if self.config.shells:
            edges = list(itertools.accumulate(c * phi for c in self.config.shells))
            self.targets = [float(c * phi) for c in self.config.shells]
        else:
            edges = [phi]
            self.targets = [float(phi)]
        self.radii = [radius_for_volume(d, v) for v in edges]
        self.scale = math.sqrt(self.config.variance_scale * float(phi))
        self.columns = tuple(f"Z{i + 1}" for i in range(len(self.radii)))

    def measure(self, lattice):
        cumulative = nested_counts(lattice, self.radii, include_zero=self.config.count_zero)
        counts = np.diff([0] + cumulative)
        return (counts - np.array(self.targets)) / self.scale

    def summarize(self, values):
        report = self.new_report()
        stats = self.column_moments[0]
        moments = {}
        for j in range(1, 7):
            moments[str(j)] = {"value": stats.raw_moment(j), "stderr": stats.raw_moment_stderr(j)}
        ks = ks_statistic(values[:, 0])
        report.empirical = {"moments": moments, "ks": ks, "samples": int(stats.count)}

        if self.config.shells:
            # Z_1 has variance c_1, so only the mixed-moment limits apply
            self._joint_moments(report, values)
        else:
            report.predictions["limit"] = {str(j): float(centered_moment_limit([1], [j])) for j in range(1, 7)}
            bands = config.CLT_BANDS
            report.add_check("mean", stats.raw_moment(1), 0.0, bands["mean"])
            report.add_check("variance", stats.variance, 1.0, bands["variance"])
            report.add_check("m4", stats.raw_moment(4), 3.0, bands["m4"])
            report.add_check("ks", ks, 0.0, bands["ks"])
            self._finite_predictions(report)
        report.notes.append(
            "bands test proximity at finite d; convergence as d grows is not certified by a single run"
        )
        return report

    def _joint_moments(self, report, values):
        c = list(self.config.shells)
        n = len(c)
        joint = {}
        for kvec in itertools.product(range(5), repeat=n):
            if not 1 <= sum(kvec) <= 4:
                continue
            product = np.prod(values ** np.array(kvec), axis=1)
            mean, stderr = mean_and_stderr(product)
            target = float(centered_moment_limit(c, list(kvec)))
            name = "joint" + "".join(map(str, kvec))
            joint[name] = {"value": mean, "stderr": stderr, "limit": target}
            report.add_check(name, mean, target, config.SE_BAND * stderr)
        report.empirical["joint"] = joint

    def _finite_predictions(self, report):
        """E[(N - phi)^k] / (s phi)^(k/2) from the unit-pattern centered family."""
        cfg = self.config
        if cfg.space is Space.LINEAR:
            report.notes.append("no finite-d centered formula for linear lattices")
            return
        if cfg.space is Space.AFFINE:
            family, q, top = CenteredFamily.AFFINE, None, cfg.d
        else:
            family, q, top = CenteredFamily.CONGRUENCE, cfg.q, cfg.d - 1
        finite = {}
        for k in FINITE_ORDERS:
            if k > top:
                continue
            regions = RegionFamily.common_ball(cfg.d, cfg.volume, k)
            series = centered_moment_finite(k, cfg.d, regions, PREDICTION_TRUNCATION, family=family, q=q)
            norm = (cfg.variance_scale * float(cfg.volume)) ** (k / 2)
            finite[str(k)] = {
                "value": series.value / norm,
                "residual": series.residual / norm,
                "residual_kind": series.residual_kind,
            }
        report.predictions["finite_d"] = finite


def run_clt(experiment_config):
    return CLTExperiment(experiment_config).run()


def run_clt_trend(experiment_config, dims):
    """
    Run the CLT experiment at each dimension and track |E[Z^4] - 3|.

    Returns:
        Report whose checks ask for a nonincreasing sequence and, at the last
        dimension, E[Z^4] within config.TREND_RELATIVE_BAND of 3.
    """
    dims = list(dims)
    if len(dims) < 2 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ParameterError("trend dimensions must be an increasing list of at least two values")
    gaps = []
    per_dim = {}
    for d in dims:
        cfg = _with_dimension(experiment_config, d)
        report = run_clt(cfg)
        m4 = report.empirical["moments"]["4"]["value"]
        gaps.append(abs(m4 - 3.0))
        per_dim[str(d)] = {"m4": m4, "gap": gaps[-1], "stderr": report.empirical["moments"]["4"]["stderr"]}
        logger.info("trend d=%d: E[Z^4]=%.4f", d, m4)

    trend = Report(kind="clt-trend", config=experiment_config.to_dict())
    trend.config["dims"] = dims
    trend.empirical = {"by_dimension": per_dim}
    worst_increase = max(b - a for a, b in zip(gaps, gaps[1:]))
    trend.add_check("nonincreasing", max(worst_increase, 0.0), 0.0, 0.0)
    trend.add_check("final_m4", per_dim[str(dims[-1])]["m4"], 3.0, 3.0 * config.TREND_RELATIVE_BAND)
    return trend


def _with_dimension(experiment_config, d):
    data = dict(vars(experiment_config))
    data["d"] = d
    if experiment_config.space is Space.CONGRUENCE:
        data["p_vec"] = None if experiment_config.p_vec == (1,) + (0,) * (experiment_config.d - 1) \
            else experiment_config.p_vec
    return type(experiment_config)(**data)
