"""Monte Carlo experiments over random lattices"""

from Experiments.clt import run_clt, run_clt_trend
from Experiments.crosscheck import run_crosscheck
from Experiments.experiment import ExperimentConfig, ExperimentKind, Report
from Experiments.functional_clt import run_functional_clt
from Experiments.poisson import run_poisson

RUNNERS = {
    ExperimentKind.CLT: run_clt,
    ExperimentKind.FUNCTIONAL_CLT: run_functional_clt,
    ExperimentKind.POISSON: run_poisson,
    ExperimentKind.CROSSCHECK: run_crosscheck,
}


def run_experiment(experiment_config):
    return RUNNERS[experiment_config.kind](experiment_config)
