"""Spectral reweighting that flattens the triangular spectrum.

The filter R inverts the triangular decay on [-alpha*fc, alpha*fc] and
ramps linearly down to zero at fc, so T = R Q is an ideal low-pass filter
on the flat region.  Its l1 operator norm (the l1 norm of the first
circulant column) stays below the closed-form budget c_alpha for every
grid size and super-resolution factor, which is what makes the flat-
spectrum stability machinery transfer to the triangular model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .operators import ForwardOperator, FourierMultiplier, make_triangular_spectrum

__all__ = [
    "FlatteningFilter",
    "build_flattening_filter",
    "operator_one_norm",
    "calpha",
    "second_difference_spectrum_bound",
]


def calpha(alpha: float) -> float:
    """Norm budget c_alpha = 2 alpha + 2/(1-alpha) + 1.11/(2 (1-alpha)^2)."""
    if not (0.5 <= alpha < 1.0):
        raise ValueError(f"alpha must be in [1/2, 1), got {alpha}")
    return 2.0 * alpha + 2.0 / (1.0 - alpha) + 1.11 / (2.0 * (1.0 - alpha) ** 2)


@dataclass(frozen=True)
class FlatteningFilter:
    """Filter spectrum r_k with its ramp parameters and measured norm."""

    grid: Grid
    alpha: float
    a: float
    b: float
    multiplier: FourierMultiplier
    one_norm: float
    norm_budget: float

    def as_operator(self) -> ForwardOperator:
        return ForwardOperator("custom", self.multiplier)

    def flattened_multiplier(self) -> FourierMultiplier:
        """Spectrum of T = R Q: exactly 1 on the flat region, 0 past fc."""
        tri = make_triangular_spectrum(self.grid)
        return FourierMultiplier(self.grid, self.multiplier.coeffs * tri.coeffs)

    def flattened_operator(self) -> ForwardOperator:
        return ForwardOperator("custom", self.flattened_multiplier())


def build_flattening_filter(grid: Grid, alpha: float) -> FlatteningFilter:
    """Construct the three-branch filter spectrum for a given alpha.

    ``alpha * fc`` must be an integer (round fc beforehand if needed); the
    ramp coefficients are a = -1/((fc(1-alpha)+1) fc(1-alpha)) and
    b = 1/((fc(1-alpha)+1)(1-alpha)).
    """
    if not (0.5 <= alpha < 1.0):
        raise ValueError(f"alpha must be in [1/2, 1), got {alpha}")
    fc = grid.cutoff
    cut = alpha * fc
    if abs(cut - round(cut)) > 1e-9:
        raise ValueError(f"alpha*fc = {cut} is not an integer; adjust fc or alpha")
    cut = int(round(cut))
    if cut < 1 or cut >= fc:
        raise ValueError(f"flat region [−{cut}, {cut}] must be inside (0, fc)")

    gap = fc * (1.0 - alpha)
    a = -1.0 / ((gap + 1.0) * gap)
    b = 1.0 / ((gap + 1.0) * (1.0 - alpha))

    k = grid.frequencies()
    ak = np.abs(k)
    coeffs = np.zeros(grid.size)
    flat = ak <= cut
    coeffs[flat] = (fc + 1.0) / (fc + 1.0 - ak[flat])
    ramp = (ak > cut) & (ak <= fc)
    coeffs[ramp] = (fc + 1.0) * (a * ak[ramp] + b)

    mult = FourierMultiplier(grid, coeffs)
    norm = _one_norm_of_multiplier(mult)
    return FlatteningFilter(
        grid=grid,
        alpha=alpha,
        a=a,
        b=b,
        multiplier=mult,
        one_norm=norm,
        norm_budget=calpha(alpha),
    )


def _one_norm_of_multiplier(mult: FourierMultiplier) -> float:
    # circulant operator: the l1 operator norm is the l1 norm of column 0,
    # which is (1/sqrt(N)) F* r_hat
    column = np.fft.ifft(mult.to_fft_order())
    return float(np.abs(column).sum())


def operator_one_norm(filt: FlatteningFilter | FourierMultiplier) -> float:
    """l1 operator norm of the circulant operator for a spectrum."""
    mult = filt.multiplier if isinstance(filt, FlatteningFilter) else filt
    return _one_norm_of_multiplier(mult)


def second_difference_spectrum_bound(x) -> float:
    """Worst signed excess of |x~_k| over the second-difference envelope.

    For a periodic sequence x with second differences of total variation A,
    every nonzero-frequency inverse-DFT coefficient obeys
    |x~_k| <= A / (sqrt(N) (2 - 2 cos(2 pi k / N))).  Returns
    max_k (|x~_k| - bound_k); a nonpositive value means the envelope holds.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 samples")
    first = x - np.roll(x, 1)
    second = first - np.roll(first, 1)
    a_total = float(np.abs(second).sum())
    coeffs = np.sqrt(n) * np.fft.ifft(x)
    k = np.arange(1, n)
    bound = a_total / (np.sqrt(n) * (2.0 - 2.0 * np.cos(2.0 * np.pi * k / n)))
    return float(np.max(np.abs(coeffs[1:]) - bound))
