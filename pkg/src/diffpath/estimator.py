"""Estimator-style front end over the functional pipeline."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .covariance import Dataset, DatasetCollection, estimate_correlation
from .evaluation import default_lambda_grid, stars_select
from .pathsolver import compute_path, interpolate


class DifferentialNetwork(BaseEstimator):
    """Sparse difference between the precision structures of two groups.

    Fits on a stacked sample matrix with binary group labels; optional
    per-sample source labels split each group into heterogeneous datasets
    that are pooled rank-wise. The penalty level is either fixed (`lam`) or
    chosen by stability selection over `lambda_grid`.

    Parameters
    ----------
    lam : float or None
        Fixed penalty level; None selects one by stability.
    c : int
        Cap on the number of nonzero matrix entries along the path.
    mu : float
        Eigenvalue clip floor (times 1/2) of the PSD projection.
    lambda_min : float
        Smallest penalty level the path is traced to when `lam` is fixed.
    lambda_grid : array-like or None
        Grid for stability selection; None uses the default log grid.
    stars_repeats, stars_fraction, stars_threshold
        Stability selection knobs: subsample count, subsample fraction,
        instability threshold.
    random_state : int or None
        Seed for the stability subsampling.

    Attributes
    ----------
    sigma_, sigma_prime_ : (d, d) arrays — per-group correlation estimates.
    path_ : SolutionPath over the full data.
    lambda_ : float — the penalty level of `delta_`.
    delta_ : (d, d) array — estimated difference at `lambda_`.
    stability_ : StabilityProfile or None.
    """

    def __init__(
        self,
        lam=None,
        c=100,
        mu=0.0,
        lambda_min=0.0,
        lambda_grid=None,
        stars_repeats=10,
        stars_fraction=0.8,
        stars_threshold=0.001,
        random_state=None,
    ):
        self.lam = lam
        self.c = c
        self.mu = mu
        self.lambda_min = lambda_min
        self.lambda_grid = lambda_grid
        self.stars_repeats = stars_repeats
        self.stars_fraction = stars_fraction
        self.stars_threshold = stars_threshold
        self.random_state = random_state

    def _split(self, X, y, sources):
        X = check_array(X, dtype=float)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError("y must have one label per row of X")
        labels = np.unique(y)
        if labels.size != 2:
            raise ValueError(f"y must contain exactly two group labels, got {labels.size}")
        sources = np.zeros(X.shape[0]) if sources is None else np.asarray(sources)
        collections = []
        for label in labels:
            mask = y == label
            datasets = tuple(
                Dataset(X[mask & (sources == src)], source_id=str(src))
                for src in np.unique(sources[mask])
            )
            collections.append(DatasetCollection(datasets))
        return collections[0], collections[1]

    def fit(self, X, y, sources=None):
        """Fit from stacked samples X (n, d), group labels y, optional sources."""
        group_a, group_b = self._split(X, y, sources)
        self.n_features_in_ = group_a.dim
        self.sigma_ = estimate_correlation(group_a, mu=self.mu)
        self.sigma_prime_ = estimate_correlation(group_b, mu=self.mu)
        if self.lam is not None:
            self.path_ = compute_path(
                self.sigma_, self.sigma_prime_, c=self.c, lambda_min=self.lambda_min
            )
            self.lambda_ = float(self.lam)
            self.delta_ = interpolate(self.path_, self.lambda_).toarray()
            self.stability_ = None
            return self
        grid = self.lambda_grid if self.lambda_grid is not None else default_lambda_grid()
        chosen, delta, profile = stars_select(
            group_a,
            group_b,
            repeats=self.stars_repeats,
            fraction=self.stars_fraction,
            threshold=self.stars_threshold,
            lambda_grid=grid,
            c=self.c,
            mu=self.mu,
            seed=self.random_state,
        )
        self.path_ = compute_path(
            self.sigma_, self.sigma_prime_, c=self.c, lambda_min=float(np.min(grid))
        )
        self.lambda_ = chosen
        self.delta_ = delta.toarray()
        self.stability_ = profile
        return self

    def interpolate(self, lam):
        """Difference estimate at any covered penalty level, as a dense array."""
        check_is_fitted(self, "path_")
        return interpolate(self.path_, lam).toarray()

    def edge_set(self, lam=None):
        """Selected upper-triangle edges at `lam` (default: the fitted level)."""
        check_is_fitted(self, "path_")
        lam = self.lambda_ if lam is None else lam
        return interpolate(self.path_, lam).support_pairs()
