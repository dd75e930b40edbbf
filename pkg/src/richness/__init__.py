"""Estimating the number of species in a population from a random sample."""
from .estimator import DirichletRichnessEstimator
from .estimators import (
    EstimatorReport, estimate_all, t_chao_lee, t_esty, t_httg, t_jackknife, t_lambda_hat, t_one,
    t_plus_one, t_two,
)
from .exceptions import (
    CIUnreliable, DegenerateAllSingletons, DegeneracyError, EmptySample, InputError,
    InvalidCount, InvalidPrevalence, RichnessError,
)
from .freq import FrequencyData, from_counts, from_prevalences, from_raw_sample
from .lambda_solver import LambdaSolution, solve_lambda
from .montecarlo import PopulationSpec, bootstrap_ci, generate_population, run_replicates
from .reconstruct import ReconstructedPopulation, reconstruct_population

__version__ = "0.1.0"

__all__ = [
    "CIUnreliable", "DegenerateAllSingletons", "DegeneracyError", "DirichletRichnessEstimator",
    "EmptySample", "EstimatorReport", "FrequencyData", "InputError", "InvalidCount",
    "InvalidPrevalence", "LambdaSolution", "PopulationSpec", "ReconstructedPopulation",
    "RichnessError", "bootstrap_ci", "estimate_all", "from_counts", "from_prevalences",
    "from_raw_sample", "generate_population", "reconstruct_population", "run_replicates",
    "solve_lambda", "t_chao_lee", "t_esty", "t_httg", "t_jackknife", "t_lambda_hat", "t_one",
    "t_plus_one", "t_two",
]
