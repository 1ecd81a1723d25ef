"""Nonnegative l1 recovery: minimize ||s - Q x||_1 subject to x >= 0.

The nonsmooth objective is replaced by its Huber smoothing h_mu and driven
to the l1 optimum by continuation: a geometric ladder of smoothing levels,
each warm-started from the previous one, solved by an accelerated projected
gradient method (momentum with restart on objective increase).  The step
size is 1/L with L = (max_k |m_k|)^2 / mu, the gradient Lipschitz constant
of the smoothed objective.  The returned iterate is the best one seen,
measured by the true l1 residual.

A brute-force feasibility oracle over tiny instances is included as an
independent reference for the solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleInfeasibleError, SolverError
from .grid import GridSignal
from .operators import ForwardOperator
from .rayleigh import RayleighParams, SupportSet, is_regular

__all__ = [
    "SolverConfig",
    "SolveResult",
    "huber",
    "huber_grad",
    "huber_objective",
    "mu0_from_data",
    "solve",
    "exhaustive_search_oracle",
]


def huber(t, mu: float):
    """Huber value: t^2/(2 mu) for |t| <= mu, |t| - mu/2 beyond."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    t = np.asarray(t, dtype=np.float64)
    a = np.abs(t)
    out = np.where(a <= mu, 0.5 * t * t / mu, a - 0.5 * mu)
    return out if out.ndim else float(out)


def huber_grad(t, mu: float):
    """Huber derivative: clamp(t/mu, -1, 1)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    t = np.asarray(t, dtype=np.float64)
    out = np.clip(t / mu, -1.0, 1.0)
    return out if out.ndim else float(out)


def huber_objective(residual: np.ndarray, mu: float) -> float:
    return float(np.sum(huber(residual, mu)))


def mu0_from_data(s: GridSignal, scale: float = 0.1) -> float:
    """Base smoothing level scale * sum(sqrt(s)) / (grid cardinality).

    For photon-count data this estimates the noise level per entry.
    Requires a nonnegative observation.
    """
    values = s.values
    if values.size and float(values.min()) < 0.0:
        raise ValueError("mu0_from_data requires nonnegative observations")
    return scale * float(np.sqrt(values).sum()) / s.grid.cardinality


@dataclass(frozen=True)
class SolverConfig:
    """Continuation and inner-loop settings.

    ``continuation_factors`` multiply the base smoothing level mu0; they
    must decrease strictly to 1.  Stages before the last stop once the
    relative l2 step falls below ``inner_tol`` or after ``inner_max_iter``
    iterations; the last stage always runs ``final_iter`` iterations.
    """

    mu0_scale: float = 0.1
    continuation_factors: tuple = (1e3, 1e2, 1e1, 1.0)
    inner_tol: float = 1e-5
    inner_max_iter: int = 1000
    final_iter: int = 15000
    mu0: float | None = None

    def __post_init__(self):
        f = tuple(float(v) for v in self.continuation_factors)
        if not f or f[-1] != 1.0 or any(nxt >= prev for prev, nxt in zip(f, f[1:])):
            raise ValueError("continuation factors must decrease strictly to 1")
        if self.inner_tol <= 0 or self.inner_max_iter < 1 or self.final_iter < 1:
            raise ValueError("tolerances and iteration budgets must be positive")
        if self.mu0 is not None and self.mu0 <= 0:
            raise ValueError("explicit mu0 must be positive")
        object.__setattr__(self, "continuation_factors", f)


@dataclass
class SolveResult:
    """Outcome of a solve: recovered signal plus a per-stage trace."""

    x_hat: GridSignal
    residual_l1: float
    mu_values: list[float]
    objectives: list[np.ndarray]   # smoothed objective per iteration, per stage
    residuals: list[np.ndarray]    # true l1 residual per iteration, per stage
    iterations: list[int]
    best_stage: int
    best_iteration: int

    @property
    def total_iterations(self) -> int:
        return int(sum(self.iterations))


def _resolve_mu0(op: ForwardOperator, s: GridSignal, cfg: SolverConfig) -> float:
    if cfg.mu0 is not None:
        return cfg.mu0
    values = s.values
    # sqrt on the positive part: flat-spectrum observations have negative
    # ripples on which the photon-noise formula is undefined
    base = cfg.mu0_scale * float(np.sqrt(np.clip(values, 0.0, None)).sum())
    base /= s.grid.cardinality
    if base == 0.0:
        base = 1e-12 * float(np.abs(values).max())
    return base


def solve(op: ForwardOperator, s: GridSignal, cfg: SolverConfig | None = None) -> SolveResult:
    """Minimize ||s - Q x||_1 over x >= 0 via smoothing and continuation."""
    cfg = cfg or SolverConfig()
    if s.grid != op.grid:
        raise ValueError("observation grid does not match operator grid")
    data = s.values
    if not np.all(np.isfinite(data)):
        raise SolverError("observation contains non-finite values")
    if float(np.abs(data).sum()) == 0.0:
        zero = GridSignal.zeros(op.grid)
        return SolveResult(zero, 0.0, [], [], [], [], 0, 0)

    mu0 = _resolve_mu0(op, s, cfg)
    peak = op.multiplier.max_abs()
    if peak == 0.0:
        raise SolverError("operator annihilates everything; nothing to invert")

    x = np.zeros(op.grid.shape)
    ax = op.apply_values(x)
    best_resid = math.inf
    best_x = x
    best_stage = best_iter = 0

    mu_values: list[float] = []
    objectives: list[np.ndarray] = []
    residuals: list[np.ndarray] = []
    iterations: list[int] = []

    n_stages = len(cfg.continuation_factors)
    for stage, factor in enumerate(cfg.continuation_factors):
        mu = factor * mu0
        final = stage == n_stages - 1
        max_iter = cfg.final_iter if final else cfg.inner_max_iter
        step = mu / (peak * peak)

        obj_log = np.empty(max_iter)
        res_log = np.empty(max_iter)
        x_old = x
        ax_old = ax
        t_mom = 1.0
        obj_cur = huber_objective(data - ax, mu)
        done = 0

        for it in range(max_iter):
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
            theta = (t_mom - 1.0) / t_next
            w = x + theta * (x - x_old)
            aw = ax + theta * (ax - ax_old)
            grad = -op.adjoint_values(huber_grad(data - aw, mu))
            x_new = np.maximum(w - step * grad, 0.0)
            ax_new = op.apply_values(x_new)
            resid_vec = data - ax_new
            obj_new = huber_objective(resid_vec, mu)
            if not math.isfinite(obj_new):
                raise SolverError(f"non-finite objective at stage {stage}, iter {it}")
            res_l1 = float(np.abs(resid_vec).sum())

            if res_l1 < best_resid:
                best_resid = res_l1
                best_x = x_new
                best_stage, best_iter = stage, it

            if obj_new > obj_cur:
                t_next = 1.0  # restart momentum after an objective increase
            step_norm = float(np.linalg.norm(x_new - x))
            ref_norm = float(np.linalg.norm(x))

            x_old, ax_old = x, ax
            x, ax = x_new, ax_new
            t_mom = t_next
            obj_cur = obj_new
            obj_log[it] = obj_new
            res_log[it] = res_l1
            done = it + 1

            if not final and step_norm <= cfg.inner_tol * max(ref_norm, 1e-30):
                break

        mu_values.append(mu)
        objectives.append(obj_log[:done].copy())
        residuals.append(res_log[:done].copy())
        iterations.append(done)

    x_hat = GridSignal(op.grid, best_x, nonneg=True)
    final_resid = float(np.abs(data - op.apply_values(best_x)).sum())
    return SolveResult(
        x_hat=x_hat,
        residual_l1=final_resid,
        mu_values=mu_values,
        objectives=objectives,
        residuals=residuals,
        iterations=iterations,
        best_stage=best_stage,
        best_iteration=best_iter,
    )


def exhaustive_search_oracle(
    op: ForwardOperator,
    s: GridSignal,
    params: RayleighParams,
    delta: float,
    max_spikes: int = 3,
    amplitudes=None,
) -> GridSignal:
    """Feasibility search over supports in the class and lattice amplitudes.

    Intended for tiny 1D instances (N <= 24, at most 3 spikes).  Scans all
    supports of size up to ``max_spikes`` that belong to the class, with
    amplitudes drawn from the given lattice, and returns the candidate with
    the smallest l1 residual provided it is within ``delta``.
    """
    grid = op.grid
    if grid.dimension != 1:
        raise ValueError("the exhaustive oracle is 1D only")
    if grid.size > 24 or max_spikes > 3:
        raise ValueError("instance too large for exhaustive search")
    if amplitudes is None:
        amplitudes = np.linspace(0.0, 2.0, 21)[1:]
    amplitudes = np.asarray(amplitudes, dtype=np.float64)

    columns = np.empty((grid.size, grid.size))
    for j in range(grid.size):
        e = np.zeros(grid.size)
        e[j] = 1.0
        columns[:, j] = op.apply_values(e)

    data = s.values
    best = (math.inf, None, None)
    for k in range(1, max_spikes + 1):
        for subset in itertools.combinations(range(grid.size), k):
            ok, _ = is_regular(SupportSet.from_flat(grid, subset), params)
            if not ok:
                continue
            cols = columns[:, list(subset)]
            for amps in itertools.product(amplitudes, repeat=k):
                resid = float(
                    np.abs(data - cols @ np.asarray(amps)).sum()
                )
                if resid < best[0]:
                    best = (resid, subset, amps)
    resid, subset, amps = best
    if subset is None or resid > delta:
        raise OracleInfeasibleError(
            f"no candidate within delta={delta:.3g} (best residual {resid:.3g})"
        )
    values = np.zeros(grid.size)
    values[list(subset)] = amps
    return GridSignal(grid, values, nonneg=True)
