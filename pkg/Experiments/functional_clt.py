"""Functional CLT: Z_d(t) on nested scalings t^(1/d) S_d against Brownian covariance"""

import logging
import math

import numpy as np

import config
from lattice import nested_counts
from regions import radius_for_volume

from Experiments.experiment import Experiment, ExperimentKind, mean_and_stderr

logger = logging.getLogger(__name__)


class FunctionalCLTExperiment(Experiment):
    kind = ExperimentKind.FUNCTIONAL_CLT

    def __init__(self, experiment_config):
        super().__init__(experiment_config)
        phi = self.config.volume
        self.grid = [float(t) for t in self.config.t_grid]
        self.targets = np.array([float(t * phi) for t in self.config.t_grid])
        # vol(t^(1/d) S) = t vol(S), so the radii scale by t^(1/d)
        self.radii = [radius_for_volume(self.config.d, t * phi) for t in self.config.t_grid]
        self.scale = math.sqrt(self.config.variance_scale * float(phi))
        self.columns = tuple(f"Z({t})" for t in self.config.t_grid)

    def measure(self, lattice):
        counts = np.array(nested_counts(lattice, self.radii, include_zero=self.config.count_zero), dtype=float)
        return (counts - self.targets) / self.scale

    def summarize(self, values):
        report = self.new_report()
        grid = self.grid
        n = len(grid)

        means = {}
        for i, t in enumerate(grid):
            mean, stderr = mean_and_stderr(values[:, i])
            means[str(self.config.t_grid[i])] = {"value": mean, "stderr": stderr}
            report.add_check(f"mean[{self.config.t_grid[i]}]", mean, 0.0, config.SE_BAND * stderr)

        centered = values - values.mean(axis=0)
        covariance = []
        for i in range(n):
            row = []
            for j in range(n):
                value, stderr = mean_and_stderr(centered[:, i] * centered[:, j])
                target = min(grid[i], grid[j])
                row.append({"value": value, "stderr": stderr, "target": target})
                if j >= i:
                    name = f"cov[{self.config.t_grid[i]},{self.config.t_grid[j]}]"
                    report.add_check(name, value, target, config.SE_BAND * stderr)
            covariance.append(row)

        # increments over consecutive grid points should look like independent N(0, dt)
        edges = [0.0] + grid
        increments = np.diff(np.hstack([np.zeros((len(values), 1)), values]), axis=1)
        table = []
        for i in range(n):
            dt = edges[i + 1] - edges[i]
            var, var_se = mean_and_stderr(increments[:, i] ** 2)
            m4, m4_se = mean_and_stderr(increments[:, i] ** 4)
            table.append({
                "interval": [edges[i], edges[i + 1]],
                "variance": var,
                "variance_stderr": var_se,
                "variance_target": dt,
                "m4": m4,
                "m4_stderr": m4_se,
                "m4_target": 3.0 * dt * dt,
            })
            report.add_check(f"increment_m4[{i}]", m4, 3.0 * dt * dt, config.SE_BAND * m4_se, informational=True)
        cross = {}
        for i in range(n):
            for j in range(i + 1, n):
                value, stderr = mean_and_stderr(increments[:, i] * increments[:, j])
                cross[f"{i},{j}"] = {"value": value, "stderr": stderr, "target": 0.0}

        report.empirical = {
            "means": means,
            "covariance": covariance,
            "increments": table,
            "increment_cross": cross,
            "samples": len(values),
        }
        report.notes.append("Brownian covariance min(s, t) is the d -> infinity limit; bands are 4 standard errors")
        return report


def run_functional_clt(experiment_config):
    return FunctionalCLTExperiment(experiment_config).run()
