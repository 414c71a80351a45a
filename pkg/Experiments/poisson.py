"""Poisson process limit: successive volumes, joint counts and gap statistics"""

import logging
import math

import numpy as np

import config
from lattice import nested_counts, successive_volumes
from moments import poisson_joint_moment
from regions import radius_for_volume
from running_stats import ks_statistic

from Experiments.experiment import Experiment, ExperimentKind, mean_and_stderr

logger = logging.getLogger(__name__)


class PoissonExperiment(Experiment):
    """
    Per lattice: the volumes V_1 <= ... <= V_n of the balls through the n shortest
    points, and the counts at the configured volume levels.

    Origin-symmetric point sets (linear lattices, q = 2) are reduced to one point
    per +-pair, so the counts are N/2 and the limit intensity is 1/2.
    """

    kind = ExperimentKind.POISSON

    def __init__(self, experiment_config):
        super().__init__(experiment_config)
        cfg = self.config
        self.radii = [radius_for_volume(cfg.d, v) for v in _distinct(cfg.levels)]
        self.columns = tuple(f"V{i + 1}" for i in range(cfg.n_points)) + tuple(f"N({v})" for v in cfg.levels)

    def measure(self, lattice):
        cfg = self.config
        volumes = successive_volumes(
            lattice, cfg.n_points, include_zero=cfg.count_zero, distinct_pairs=cfg.symmetric_pairs
        )
        counts = nested_counts(lattice, self.radii, include_zero=cfg.count_zero)
        by_level = dict(zip(_distinct(cfg.levels), counts))
        level_counts = [by_level[v] for v in cfg.levels]
        if cfg.symmetric_pairs:
            level_counts = [c / 2 for c in level_counts]
        return np.array(list(volumes) + level_counts, dtype=float)

    def summarize(self, values):
        cfg = self.config
        report = self.new_report()
        n = cfg.n_points
        lam = cfg.intensity
        volumes = values[:, :n]
        counts = values[:, n:]

        joint = {}
        for j in range(1, len(cfg.levels) + 1):
            product = np.prod(counts[:, :j], axis=1)
            mean, stderr = mean_and_stderr(product)
            target = poisson_joint_moment(lam, list(cfg.levels[:j]))
            name = "E[" + "".join(f"N{i + 1}" for i in range(j)) + "]"
            joint[name] = {"value": mean, "stderr": stderr, "target": float(target), "target_exact": str(target)}
            report.add_check(name, mean, float(target), config.SE_BAND * stderr)

        gaps = np.diff(np.hstack([np.zeros((len(volumes), 1)), volumes]), axis=1).ravel()
        gap_mean, gap_se = mean_and_stderr(gaps)
        expected = float(1 / lam)
        gap_ks = ks_statistic(gaps, "expon", args=(0.0, expected))
        report.add_check("gap_mean", gap_mean, expected, config.GAP_MEAN_RELATIVE_BAND * expected)
        report.add_check("gap_ks", gap_ks, 0.0, _ks_band(len(gaps)), informational=True)

        report.empirical = {
            "joint_moments": joint,
            "gaps": {"mean": gap_mean, "stderr": gap_se, "ks": gap_ks, "count": int(len(gaps))},
            "volumes_mean": [float(x) for x in volumes.mean(axis=0)],
            "samples": len(values),
        }
        report.predictions = {"intensity": str(lam), "gap_mean": expected}
        if cfg.symmetric_pairs:
            report.notes.append("counts and volumes use one point per +-pair (N/2)")
        report.notes.append("fixed (x, N) grid only; uniformity over unbounded ranges is untested")
        return report


def _distinct(levels):
    return sorted(set(levels))


def _ks_band(n):
    # 1% critical value of the one-sample KS distance, asymptotic form
    return 1.628 / math.sqrt(n)


def run_poisson(experiment_config):
    return PoissonExperiment(experiment_config).run()
