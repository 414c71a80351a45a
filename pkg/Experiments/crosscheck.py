"""Empirical E[N^k] against the truncated moment formulas"""

import logging
import math

import config
from errors import ParameterError
from lattice import nested_counts
from moments import affine_moment, congruence_moment
from regions import RegionFamily, radius_for_volume
from samplers import Space

from Experiments.experiment import Experiment, ExperimentKind, mean_and_stderr

logger = logging.getLogger(__name__)


class CrosscheckExperiment(Experiment):
    kind = ExperimentKind.CROSSCHECK
    columns = ("N",)

    def __init__(self, experiment_config):
        super().__init__(experiment_config)
        if self.config.space is Space.LINEAR:
            raise ParameterError("crosscheck compares against the affine and congruence formulas only")
        self.radius = radius_for_volume(self.config.d, self.config.volume)

    def measure(self, lattice):
        return nested_counts(lattice, [self.radius], include_zero=self.config.count_zero)

    def predict(self, k):
        cfg = self.config
        regions = RegionFamily.common_ball(cfg.d, cfg.volume, k)
        if cfg.space is Space.AFFINE:
            return affine_moment(k, cfg.d, regions, cfg.truncation)
        return congruence_moment(k, cfg.d, cfg.q, regions, cfg.truncation)

    def summarize(self, values):
        cfg = self.config
        report = self.new_report()
        counts = values[:, 0]
        empirical = {}
        predictions = {}
        for k in range(1, cfg.k_max + 1):
            mean, stderr = mean_and_stderr(counts**k)
            series = self.predict(k)
            empirical[str(k)] = {"value": mean, "stderr": stderr}
            predictions[str(k)] = {
                "value": series.value,
                "residual": series.residual,
                "residual_kind": series.residual_kind,
                "exact": None if series.exact_value is None else str(series.exact_value),
            }
            band = config.SE_BAND * stderr + series.residual + config.SE_BAND * series.stderr
            report.add_check(f"E[N^{k}]", mean, series.value, band)
            if math.isinf(series.residual):
                report.notes.append(f"k={k}: truncation residual is unbounded, the check is vacuous")
        report.empirical = {"moments": empirical, "samples": len(values)}
        report.predictions = predictions
        logger.info("crosscheck %s d=%d: %s", cfg.space.value, cfg.d,
                    ", ".join(f"k={k} {empirical[k]['value']:.4g} vs {predictions[k]['value']:.4g}"
                              for k in empirical))
        return report


def run_crosscheck(experiment_config):
    return CrosscheckExperiment(experiment_config).run()
