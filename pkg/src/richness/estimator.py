"""Scikit-learn style wrapper around the Dirichlet richness estimator."""
from __future__ import annotations

from typing import Optional

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import INPUT_KINDS, check_frequency_input
from .estimators import estimate_all
from .montecarlo import bootstrap_ci, sample_counts, stream
from .reconstruct import reconstruct_population


class DirichletRichnessEstimator(BaseEstimator):
    """Estimate the number of species from one sample.

    Parameters
    ----------
    input_kind : {"auto", "labels", "counts", "prevalences"}, default="auto"
        How :meth:`fit` interprets ``X``; see
        :func:`richness._validation.check_frequency_input`.
    esty_k : float, default=2.0
        Constant of Esty's estimator in the report.
    t2_coupled : bool, default=False
        Reading used by the second-moment estimator in the report.
    tail : {"geometric", "uniform"}, default="geometric"
        Family assigned to the unobserved species in ``population_``.

    Attributes
    ----------
    n_species_ : int
        Rounded estimate of the number of species.
    n_species_raw_ : float
        Unrounded estimate.
    lambda_ : float
        Selected Dirichlet prior parameter (``inf`` on the uniform branch).
    gamma2_ : float
        Estimated normalised interspecies variance ``1/lambda_``.
    report_ : EstimatorReport
        Every estimator on the fitted sample.
    freq_ : FrequencyData
    population_ : ReconstructedPopulation
        Estimated probabilities of all ``n_species_`` species.

    Examples
    --------
    >>> est = DirichletRichnessEstimator().fit([3, 3, 1, 1])
    >>> est.n_species_, est.lambda_
    (7, 1.5)
    """

    def __init__(self, input_kind: str = "auto", esty_k: float = 2.0, t2_coupled: bool = False,
                 tail: str = "geometric"):
        self.input_kind = input_kind
        self.esty_k = esty_k
        self.t2_coupled = t2_coupled
        self.tail = tail

    def _check_params(self):
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"input_kind must be one of {INPUT_KINDS}, got {self.input_kind!r}")
        if not self.esty_k > 0:
            raise ValueError(f"esty_k must be positive, got {self.esty_k}")
        if self.tail not in ("geometric", "uniform"):
            raise ValueError(f"tail must be 'geometric' or 'uniform', got {self.tail!r}")

    def fit(self, X, y=None):
        """Fit on a sample given as labels, a count vector or prevalences.

        ``y`` is ignored and exists for API compatibility.
        """
        self._check_params()
        freq = check_frequency_input(X, self.input_kind)
        report = estimate_all(freq, esty_k=self.esty_k, t2_coupled=self.t2_coupled)
        self.freq_ = freq
        self.report_ = report
        self.n_species_ = report.t_lambda_hat_rounded
        self.n_species_raw_ = report.t_lambda_hat
        self.lambda_ = report.lambda_hat
        self.gamma2_ = report.gamma2_hat
        self.population_ = reconstruct_population(freq, tail=self.tail)
        return self

    def confidence_interval(self, level=0.95, B: int = 1000, n: Optional[int] = None,
                            random_state: int = 0):
        """Percentile-bootstrap interval(s) for the number of species."""
        check_is_fitted(self, "report_")
        return bootstrap_ci(self.freq_, n=n, level=level, B=B, seed=random_state)

    def sample(self, n: int, random_state: int = 0):
        """Draw per-species counts of ``n`` observations from ``population_``."""
        check_is_fitted(self, "population_")
        return sample_counts(self.population_.probs, n, stream(random_state))
