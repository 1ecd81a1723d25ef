"""Scikit-learn style front end for the spike recovery solver.

``SpikeRecovery`` is a transformer: rows of X are observations on the
grid (2D images arrive flattened, row-major) and ``transform`` returns the
recovered nonnegative spike signals in the same layout.  All solver
settings are constructor parameters, so the estimator clones, grid-searches
and composes in pipelines like any other.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .grid import Grid, GridSignal
from .operators import ForwardOperator, flat_operator, triangular_operator
from .solver import SolverConfig, solve

__all__ = ["SpikeRecovery"]


class SpikeRecovery(BaseEstimator, TransformerMixin):
    """Recover nonnegative spikes from low-pass observations.

    Parameters
    ----------
    spectrum : {"flat", "triangular"}
        Shape of the convolution spectrum.
    grid_size : int
        Grid points per axis (N), even.
    cutoff : int
        Frequency cutoff fc of the observation model.
    dimension : int
        1 for signals, 2 for images (rows of X flattened row-major).
    mu0_scale, continuation_factors, inner_tol, inner_max_iter, final_iter, mu0
        Passed through to :class:`~spikesr.solver.SolverConfig`.

    Attributes
    ----------
    operator_ : ForwardOperator
        The forward model built during ``fit``.
    results_ : list of SolveResult
        Per-row solver traces from the most recent ``transform``.
    """

    def __init__(
        self,
        spectrum: str = "flat",
        grid_size: int = 64,
        cutoff: int = 8,
        dimension: int = 1,
        mu0_scale: float = 0.1,
        continuation_factors: tuple = (1e3, 1e2, 1e1, 1.0),
        inner_tol: float = 1e-5,
        inner_max_iter: int = 1000,
        final_iter: int = 15000,
        mu0: float | None = None,
    ):
        self.spectrum = spectrum
        self.grid_size = grid_size
        self.cutoff = cutoff
        self.dimension = dimension
        self.mu0_scale = mu0_scale
        self.continuation_factors = continuation_factors
        self.inner_tol = inner_tol
        self.inner_max_iter = inner_max_iter
        self.final_iter = final_iter
        self.mu0 = mu0

    def _build_operator(self) -> ForwardOperator:
        grid = Grid(self.dimension, self.grid_size, self.cutoff)
        if self.spectrum == "flat":
            return flat_operator(grid)
        if self.spectrum == "triangular":
            return triangular_operator(grid)
        raise ValueError(f"spectrum must be 'flat' or 'triangular', got {self.spectrum!r}")

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(
            mu0_scale=self.mu0_scale,
            continuation_factors=tuple(self.continuation_factors),
            inner_tol=self.inner_tol,
            inner_max_iter=self.inner_max_iter,
            final_iter=self.final_iter,
            mu0=self.mu0,
        )

    def fit(self, X=None, y=None):
        """Build and validate the forward model (nothing is learned)."""
        self.operator_ = self._build_operator()
        self.config_ = self._solver_config()
        self.n_features_in_ = self.operator_.grid.cardinality
        return self

    def transform(self, X) -> np.ndarray:
        """Recover spikes for each observation row."""
        check_is_fitted(self, "operator_")
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        single = X.ndim == 1
        rows = X[None, :] if single else X
        if rows.shape[1] != self.n_features_in_:
            raise ValueError(
                f"each row must have {self.n_features_in_} entries, got {rows.shape[1]}"
            )
        grid = self.operator_.grid
        out = np.empty_like(rows)
        self.results_ = []
        for i, row in enumerate(rows):
            signal = GridSignal(grid, row.reshape(grid.shape))
            result = solve(self.operator_, signal, self.config_)
            self.results_.append(result)
            out[i] = result.x_hat.values.ravel()
        return out[0] if single else out

    def observe(self, X) -> np.ndarray:
        """Apply the forward model row-wise (the inverse of ``transform``)."""
        check_is_fitted(self, "operator_")
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        single = X.ndim == 1
        rows = X[None, :] if single else X
        grid = self.operator_.grid
        out = np.empty_like(rows)
        for i, row in enumerate(rows):
            out[i] = self.operator_.apply_values(row.reshape(grid.shape)).ravel()
        return out[0] if single else out
