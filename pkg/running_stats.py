"""Streaming central moments with pairwise merging, and the Kolmogorov-Smirnov distance."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import comb

import config
from errors import ParameterError


@dataclass
class RunningMoments:
    """
    Count, mean and central moment sums M_p = sum (x - mean)^p for p = 2..order.

    Two summaries combine with the pairwise update of Pebay, so any split of the
    data reduces to the single-pass result up to rounding.
    """

    order: int = config.MOMENT_ORDER
    count: int = 0
    mean: float = 0.0
    sums: np.ndarray = None  # sums[p] = M_p, entries 0 and 1 unused
    min: float = math.inf
    max: float = -math.inf

    def __post_init__(self):
        if self.order < 2:
            raise ParameterError("moment order must be at least 2")
        if self.sums is None:
            self.sums = np.zeros(self.order + 1)

    @classmethod
    def from_values(cls, values, order=config.MOMENT_ORDER):
        values = np.asarray(values, dtype=float).ravel()
        result = cls(order)
        if not len(values):
            return result
        result.count = len(values)
        result.mean = float(values.mean())
        deviations = values - result.mean
        for p in range(2, order + 1):
            result.sums[p] = float(np.sum(deviations**p))
        result.min = float(values.min())
        result.max = float(values.max())
        return result

    def update(self, x):
        self.merge_in(RunningMoments.from_values([x], self.order))

    def merge_in(self, other):
        merged = merge(self, other)
        self.count, self.mean, self.sums = merged.count, merged.mean, merged.sums
        self.min, self.max = merged.min, merged.max

    def central_moment(self, p):
        if p == 0:
            return 1.0
        if p == 1:
            return 0.0
        return self.sums[p] / self.count

    @property
    def variance(self):
        return self.central_moment(2) if self.count else math.nan

    @property
    def sample_variance(self):
        return self.sums[2] / (self.count - 1) if self.count > 1 else math.nan

    @property
    def std(self):
        return math.sqrt(self.variance)

    def raw_moment(self, j):
        """E[X^j] from the mean and central moments."""
        if j > self.order:
            raise ParameterError(f"raw moment {j} needs order >= {j}, tracking {self.order}")
        return sum(comb(j, i, exact=True) * self.mean ** (j - i) * self.central_moment(i) for i in range(j + 1))

    def raw_moment_stderr(self, j):
        """sqrt(Var[X^j] / n); needs moments up to 2j."""
        if 2 * j > self.order:
            raise ParameterError(f"standard error of moment {j} needs order >= {2 * j}, tracking {self.order}")
        if self.count < 2:
            return math.inf
        var = self.raw_moment(2 * j) - self.raw_moment(j) ** 2
        return math.sqrt(max(var, 0.0) / self.count)

    def standardized_moment(self, p):
        return self.central_moment(p) / self.variance ** (p / 2)

    def to_dict(self):
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance if self.count else None,
            "min": self.min if self.count else None,
            "max": self.max if self.count else None,
        }


def merge(a, b):
    """Combine two summaries; orders must agree."""
    if a.order != b.order:
        raise ParameterError(f"cannot merge order {a.order} with order {b.order}")
    if b.count == 0:
        return RunningMoments(a.order, a.count, a.mean, a.sums.copy(), a.min, a.max)
    if a.count == 0:
        return RunningMoments(b.order, b.count, b.mean, b.sums.copy(), b.min, b.max)
    na, nb = a.count, b.count
    n = na + nb
    delta = b.mean - a.mean
    sums = np.zeros(a.order + 1)
    for p in range(2, a.order + 1):
        total = a.sums[p] + b.sums[p]
        for k in range(1, p - 1):
            total += comb(p, k, exact=True) * delta**k * (
                (-nb / n) ** k * a.sums[p - k] + (na / n) ** k * b.sums[p - k]
            )
        total += (na * nb * delta / n) ** p * (1.0 / nb ** (p - 1) - (-1.0 / na) ** (p - 1))
        sums[p] = total
    return RunningMoments(
        a.order,
        n,
        a.mean + delta * nb / n,
        sums,
        min(a.min, b.min),
        max(a.max, b.max),
    )


def ks_statistic(samples, cdf="norm", args=()):
    """Two-sided sup distance between the empirical CDF of samples and cdf."""
    samples = np.asarray(samples, dtype=float).ravel()
    if not len(samples):
        raise ParameterError("KS statistic of an empty sample")
    return float(stats.kstest(samples, cdf, args=args).statistic)
