"""Base experiment: seeded per-sample lattices, chunked worker pool, ordered reduction"""

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from multiprocessing import Pool

import numpy as np

import config
from errors import EnumerationBudgetError, ParameterError
from moments import Truncation
from running_stats import RunningMoments, merge
from samplers import Space, sample_lattice, substream

logger = logging.getLogger(__name__)


class ExperimentKind(str, Enum):
    CLT = "clt"
    FUNCTIONAL_CLT = "fclt"
    POISSON = "poisson"
    CROSSCHECK = "crosscheck"


@dataclass
class ExperimentConfig:
    """Everything that determines a run; two equal configs give identical reports."""

    kind: ExperimentKind
    space: Space = Space.AFFINE
    d: int = 10
    volume: object = Fraction(20)  # phi(d) or V
    k_max: int = 2
    samples: int = config.DEFAULT_SAMPLES
    seed: int = config.DEFAULT_SEED
    prime: int = config.DEFAULT_PRIME
    p_vec: tuple = None
    q: int = None
    t_grid: tuple = config.DEFAULT_T_GRID
    n_points: int = config.DEFAULT_N_POINTS
    levels: tuple = config.DEFAULT_LEVELS  # Poisson joint-moment volumes
    shells: tuple = ()  # fractions c_i of disjoint shells for joint CLT moments
    include_zero: bool = None
    workers: int = config.DEFAULT_WORKERS
    truncation: Truncation = field(default_factory=Truncation)

    def __post_init__(self):
        self.kind = ExperimentKind(self.kind)
        self.space = Space(self.space)
        self.volume = Fraction(str(self.volume)) if not isinstance(self.volume, Fraction) else self.volume
        if self.volume <= 0:
            raise ParameterError(f"volume must be positive, got {self.volume}")
        if self.samples < 1:
            raise ParameterError("samples must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be positive")
        if not 2 <= self.d <= config.MAX_DIMENSION:
            raise ParameterError(f"dimension {self.d} outside 2..{config.MAX_DIMENSION}")
        if self.space is Space.CONGRUENCE:
            if self.q is None or self.q < 2:
                raise ParameterError("congruence experiments need q >= 2")
            if self.d < 3:
                raise ParameterError("congruence experiments need d >= 3")
            if self.p_vec is None:
                self.p_vec = (1,) + (0,) * (self.d - 1)
            self.p_vec = tuple(int(x) for x in self.p_vec)
            if len(self.p_vec) != self.d or math.gcd(*self.p_vec, self.q) != 1:
                raise ParameterError(f"p={self.p_vec} must have length d and gcd(p, q) = 1")
        self.t_grid = tuple(Fraction(str(t)) for t in self.t_grid)
        if not self.t_grid or any(not 0 < t <= 1 for t in self.t_grid) \
                or any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ParameterError("t_grid must be increasing inside (0, 1]")
        if self.n_points < 1:
            raise ParameterError("n_points must be positive")
        self.levels = tuple(Fraction(str(v)) for v in self.levels)
        if any(v <= 0 for v in self.levels) or any(b < a for a, b in zip(self.levels, self.levels[1:])):
            raise ParameterError("Poisson levels must be positive and nondecreasing")
        self.shells = tuple(Fraction(str(c)) for c in self.shells)
        if self.shells and (any(c <= 0 for c in self.shells) or sum(self.shells) > 1):
            raise ParameterError("shell fractions must be positive with sum at most 1")
        if self.kind is ExperimentKind.CROSSCHECK:
            top = self.d - 1 if self.space is Space.CONGRUENCE else self.d
            if not 1 <= self.k_max <= top:
                raise ParameterError(f"k_max={self.k_max} outside 1..{top} for {self.space.value} lattices")
        if isinstance(self.truncation, dict):
            self.truncation = Truncation(**self.truncation)

    @property
    def symmetric_pairs(self):
        """Point sets symmetric under x -> -x: counts come in pairs."""
        return self.space is Space.LINEAR or (self.space is Space.CONGRUENCE and self.q == 2)

    @property
    def intensity(self):
        return Fraction(1, 2) if self.symmetric_pairs else Fraction(1)

    @property
    def variance_scale(self):
        return 2 if self.symmetric_pairs else 1

    @property
    def count_zero(self):
        if self.include_zero is not None:
            return self.include_zero
        return self.space is not Space.LINEAR

    def to_dict(self):
        data = asdict(self)
        data["kind"] = self.kind.value
        data["space"] = self.space.value
        data["volume"] = str(self.volume)
        data["t_grid"] = [str(t) for t in self.t_grid]
        data["levels"] = [str(v) for v in self.levels]
        data["shells"] = [str(c) for c in self.shells]
        data["p_vec"] = None if self.p_vec is None else list(self.p_vec)
        data["include_zero"] = self.count_zero
        return data


@dataclass
class Report:
    kind: str
    config: dict
    version: str = config.LAB_VERSION
    empirical: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add_check(self, name, value, target, band, informational=False):
        passed = bool(abs(value - target) <= band) if math.isfinite(value) else False
        self.checks[name] = {
            "value": float(value),
            "target": float(target),
            "band": float(band),
            "passed": passed,
            "informational": informational,
        }
        return passed

    @property
    def passed(self):
        return all(check["passed"] for check in self.checks.values() if not check["informational"])

    def to_dict(self):
        return {
            "kind": self.kind,
            "version": self.version,
            "config": self.config,
            "empirical": self.empirical,
            "predictions": self.predictions,
            "checks": self.checks,
            "passed": self.passed,
            "notes": self.notes,
        }

    def rows(self):
        """Flat (name, value, target, band, passed) rows of every check."""
        return [
            {"name": name, "value": c["value"], "target": c["target"], "band": c["band"], "passed": c["passed"]}
            for name, c in self.checks.items()
        ]


def _run_chunk(task):
    experiment_cls, experiment_config, start, stop = task
    return experiment_cls(experiment_config).measure_range(start, stop)


class Experiment:
    """
    Samples one lattice per index, measures it, and reduces in index order.

    Subclasses implement measure(lattice) -> 1-d array and summarize(values) -> Report.
    """

    kind = None
    columns = ()
    moment_order = config.MOMENT_ORDER

    def __init__(self, experiment_config):
        self.config = experiment_config
        if self.kind is not None and self.config.kind is not self.kind:
            raise ParameterError(f"{type(self).__name__} runs {self.kind.value} configs, got {self.config.kind.value}")
        self.values = None  # samples x measurements, filled by run()
        self.column_moments = []

    def sample(self, index):
        rng = substream(self.config.seed, index)
        return sample_lattice(
            self.config.space, self.config.d, rng,
            prime=self.config.prime, p_vec=self.config.p_vec, q=self.config.q,
        )

    def measure(self, lattice):
        raise NotImplementedError

    def measure_range(self, start, stop):
        rows = []
        for index in range(start, stop):
            try:
                rows.append(np.asarray(self.measure(self.sample(index)), dtype=float))
            except EnumerationBudgetError as exc:
                raise exc.with_sample(index) from exc
        return np.vstack(rows)

    def _chunks(self):
        size = config.CHUNK_SIZE
        return [(start, min(start + size, self.config.samples)) for start in range(0, self.config.samples, size)]

    def run(self):
        chunks = self._chunks()
        tasks = [(type(self), self.config, start, stop) for start, stop in chunks]
        logger.info("%s: %d samples in %d chunks on %d workers", type(self).__name__,
                    self.config.samples, len(chunks), self.config.workers)
        if self.config.workers > 1:
            with Pool(self.config.workers) as pool:
                results = pool.map(_run_chunk, tasks)
        else:
            results = [_run_chunk(task) for task in tasks]

        self.column_moments = []
        for column in range(results[0].shape[1]):
            total = RunningMoments(self.moment_order)
            for block in results:
                total = merge(total, RunningMoments.from_values(block[:, column], self.moment_order))
            self.column_moments.append(total)
        self.values = np.vstack(results)
        report = self.summarize(self.values)
        logger.info("%s finished: %s", type(self).__name__, "passed" if report.passed else "failed")
        return report

    def new_report(self):
        return Report(kind=self.config.kind.value, config=self.config.to_dict())

    def write_samples_csv(self, stream):
        """Per-sample measurements, one row per lattice."""
        if self.values is None:
            raise ParameterError("no samples yet; call run() first")
        writer = csv.writer(stream)
        writer.writerow(["index"] + list(self.columns or [f"v{i}" for i in range(self.values.shape[1])]))
        for index, row in enumerate(self.values):
            writer.writerow([index] + [repr(float(x)) for x in row])


def mean_and_stderr(values):
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))
