"""Periodic grid geometry and grid-sampled signals.

Signals live on the uniform grid {0, 1/N, ..., 1 - 1/N}^D of the torus,
with D = 1 or 2.  A grid also carries the frequency cutoff fc of the
observation model; the number of observed Fourier modes per axis is
n = 2*fc + 1 and the super-resolution factor is SRF = N/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["Grid", "GridSignal"]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with an associated frequency cutoff.

    Parameters
    ----------
    dimension : int
        Ambient dimension, 1 or 2.
    size : int
        Grid points per axis (N).  Must be even.
    cutoff : int
        Frequency cutoff fc.  The observation count per axis is
        n = 2*fc + 1 and must not exceed N.
    """

    dimension: int
    size: int
    cutoff: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.size < 2 or self.size % 2 != 0:
            raise ValueError(f"grid size must be even and >= 2, got {self.size}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be nonnegative, got {self.cutoff}")
        if 2 * self.cutoff + 1 > self.size:
            raise ValueError(
                f"cutoff {self.cutoff} needs {2 * self.cutoff + 1} modes, "
                f"grid only has {self.size}"
            )

    @property
    def n_observations(self) -> int:
        """Observed modes per axis, n = 2*fc + 1."""
        return 2 * self.cutoff + 1

    @property
    def wavelength(self) -> float:
        """Cutoff wavelength lambda_c = 1/fc (inf for a pure-averaging cutoff)."""
        return 1.0 / self.cutoff if self.cutoff > 0 else math.inf

    @property
    def srf(self) -> Fraction:
        """Super-resolution factor N/n as an exact rational."""
        return Fraction(self.size, self.n_observations)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.size,) * self.dimension

    @property
    def cardinality(self) -> int:
        return self.size**self.dimension

    def positions(self) -> np.ndarray:
        """Grid positions along one axis as points of the torus [0, 1)."""
        return np.arange(self.size) / self.size

    def frequencies(self) -> np.ndarray:
        """Frequency indices k = -N/2+1, ..., N/2 (the multiplier index set)."""
        half = self.size // 2
        return np.arange(-half + 1, half + 1)

    def index_distance(self, a, b) -> np.ndarray:
        """Torus distance between per-axis grid indices, in grid steps."""
        d = np.abs(np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64))
        return np.minimum(d, self.size - d)

    def chebyshev_distance(self, p, q) -> float:
        """Torus sup-norm distance between index tuples, in torus units."""
        p = np.atleast_1d(np.asarray(p, dtype=np.int64))
        q = np.atleast_1d(np.asarray(q, dtype=np.int64))
        return float(np.max(self.index_distance(p, q))) / self.size


@dataclass(frozen=True)
class GridSignal:
    """A real array sampled on a :class:`Grid`.

    The ``nonneg`` flag asserts (and checks) entrywise nonnegativity; it is
    used for signals whose entries model light intensities.
    """

    grid: Grid
    values: np.ndarray
    nonneg: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != self.grid.shape:
            raise ValueError(
                f"values shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        if self.nonneg and arr.size and float(arr.min()) < 0.0:
            raise ValueError("signal flagged nonneg has negative entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def l1(self) -> float:
        return float(np.abs(self.values).sum())

    def with_values(self, values, nonneg: bool | None = None) -> "GridSignal":
        """New signal on the same grid."""
        return GridSignal(self.grid, values, self.nonneg if nonneg is None else nonneg)

    @staticmethod
    def zeros(grid: Grid, nonneg: bool = True) -> "GridSignal":
        return GridSignal(grid, np.zeros(grid.shape), nonneg)

    @staticmethod
    def from_spikes(grid: Grid, indices, amplitudes, nonneg: bool = True) -> "GridSignal":
        """Sparse signal with the given amplitudes at the given grid indices."""
        values = np.zeros(grid.shape)
        amplitudes = np.broadcast_to(
            np.asarray(amplitudes, dtype=np.float64), (len(indices),)
        )
        for idx, amp in zip(indices, amplitudes):
            if grid.dimension == 1:
                values[int(np.atleast_1d(idx)[0])] += amp
            else:
                i, j = (int(v) for v in np.atleast_1d(idx))
                values[i, j] += amp
        return GridSignal(grid, values, nonneg)
