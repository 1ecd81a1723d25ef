"""Low-pass convolution operators, diagonal in the DFT basis, and photon noise.

Every forward operator here is of the form F* diag(m) F with a real,
symmetric multiplier m indexed by frequencies k in [-N/2+1, N/2].  Two
spectra are built in: the ideal low-pass filter (flat on [-fc, fc]) and the
triangular spectrum whose impulse response is the Fejer kernel, the
discrete model of an incoherent imaging system.  In 2D the multiplier acts
separably per axis, which equals the Kronecker-product operator on
vectorized signals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridSignal

__all__ = [
    "FourierMultiplier",
    "ForwardOperator",
    "make_flat_spectrum",
    "make_triangular_spectrum",
    "flat_operator",
    "triangular_operator",
    "fejer_kernel",
    "add_poisson_noise",
    "poisson_sample",
]

# Relative tolerance on the imaginary residue of F* diag(m) F x; a larger
# residue indicates a broken multiplier (asymmetric or complex).
_IMAG_RTOL = 1e-10


@dataclass(frozen=True)
class FourierMultiplier:
    """Real symmetric spectrum m_k, k = -N/2+1, ..., N/2, on a grid.

    The coefficient array is stored in increasing-k order.  Symmetry
    (m_{-k} = m_k for |k| <= N/2 - 1) guarantees that the convolution
    operator maps real signals to real signals.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.float64)
        if arr.shape != (self.grid.size,):
            raise ValueError(
                f"need {self.grid.size} coefficients, got shape {arr.shape}"
            )
        half = self.grid.size // 2
        # entries 1 .. half-1 mirror entries -1 .. -(half-1)
        left = arr[: half - 1][::-1]   # k = -1, ..., -half+1
        right = arr[half : 2 * half - 1]  # k = 1, ..., half-1
        if not np.allclose(left, right, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(arr).max()))):
            raise ValueError("multiplier is not symmetric in k")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def at(self, k: int) -> float:
        half = self.grid.size // 2
        if not (-half + 1 <= k <= half):
            raise IndexError(f"frequency {k} out of range for N={self.grid.size}")
        return float(self.coeffs[k + half - 1])

    def to_fft_order(self) -> np.ndarray:
        """Coefficients rearranged to numpy's FFT frequency layout."""
        n = self.grid.size
        out = np.empty(n)
        out[self.grid.frequencies() % n] = self.coeffs
        return out

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max())


def make_flat_spectrum(grid: Grid) -> FourierMultiplier:
    """Ideal low-pass spectrum: m_k = 1 for |k| <= fc, else 0."""
    k = grid.frequencies()
    return FourierMultiplier(grid, (np.abs(k) <= grid.cutoff).astype(float))


def make_triangular_spectrum(grid: Grid) -> FourierMultiplier:
    """Triangular spectrum m_k = 1 - |k|/(fc+1) on [-fc, fc], else 0.

    Its impulse response is the (nonnegative) Fejer kernel, so the operator
    conserves the l1 mass of nonnegative signals.
    """
    k = grid.frequencies()
    m = np.clip(1.0 - np.abs(k) / (grid.cutoff + 1), 0.0, None)
    m[np.abs(k) > grid.cutoff] = 0.0
    return FourierMultiplier(grid, m)


def _real_part(values: np.ndarray, input_scale: float) -> np.ndarray:
    # FFT roundoff is proportional to the input scale, so a nearly
    # annihilated output is judged against the larger of the two scales
    scale = max(float(np.abs(values).max()), input_scale)
    if scale > 0.0:
        residue = float(np.abs(values.imag).max()) / scale
        if residue > _IMAG_RTOL:
            raise ValueError(
                f"imaginary residue {residue:.3e} exceeds {_IMAG_RTOL:.0e}; "
                "multiplier is not a real symmetric spectrum"
            )
    return np.ascontiguousarray(values.real)


@dataclass(frozen=True)
class ForwardOperator:
    """Convolution operator F* diag(m) F for a stored multiplier.

    ``kind`` is one of ``flat_1d``, ``tri_1d``, ``flat_2d``, ``tri_2d`` or
    ``custom``.  2D kinds apply the 1D multiplier separably per axis.  The
    operator is self-adjoint because the multiplier is real and symmetric.
    """

    kind: str
    multiplier: FourierMultiplier

    _KINDS = ("flat_1d", "tri_1d", "flat_2d", "tri_2d", "custom")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        expected = {"flat_1d": 1, "tri_1d": 1, "flat_2d": 2, "tri_2d": 2}
        dim = expected.get(self.kind)
        if dim is not None and self.grid.dimension != dim:
            raise ValueError(f"{self.kind} requires a {dim}D grid")

    @property
    def grid(self) -> Grid:
        return self.multiplier.grid

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        """Raw-array forward map (used in solver hot loops)."""
        m = self.multiplier.to_fft_order()
        if self.grid.dimension == 1:
            out = np.fft.ifft(m * np.fft.fft(values))
        else:
            out = np.fft.ifft2(np.fft.fft2(values) * np.outer(m, m))
        return _real_part(out, float(np.abs(values).max(initial=0.0)))

    def apply(self, signal: GridSignal) -> GridSignal:
        self._check_grid(signal)
        return GridSignal(self.grid, self.apply_values(signal.values))

    def adjoint_values(self, values: np.ndarray) -> np.ndarray:
        # real symmetric multiplier: the operator is self-adjoint
        return self.apply_values(values)

    def adjoint(self, signal: GridSignal) -> GridSignal:
        self._check_grid(signal)
        return GridSignal(self.grid, self.adjoint_values(signal.values))

    def __call__(self, signal: GridSignal) -> GridSignal:
        return self.apply(signal)

    def impulse_response(self) -> np.ndarray:
        """Column 0 of the operator (the point-spread function)."""
        e0 = np.zeros(self.grid.shape)
        e0[(0,) * self.grid.dimension] = 1.0
        return self.apply_values(e0)

    def _check_grid(self, signal: GridSignal) -> None:
        if signal.grid != self.grid:
            raise ValueError(
                f"signal grid {signal.grid} does not match operator grid {self.grid}"
            )


def flat_operator(grid: Grid) -> ForwardOperator:
    kind = "flat_1d" if grid.dimension == 1 else "flat_2d"
    return ForwardOperator(kind, make_flat_spectrum(grid))


def triangular_operator(grid: Grid) -> ForwardOperator:
    kind = "tri_1d" if grid.dimension == 1 else "tri_2d"
    return ForwardOperator(kind, make_triangular_spectrum(grid))


def fejer_kernel(t, cutoff: int, size: int):
    """Fejer kernel g(t) = (sin((1+fc) pi t) / sin(pi t))^2 / ((1+fc) N).

    This is the impulse response of the triangular-spectrum operator,
    evaluated at arbitrary torus points.  The removable singularity at
    integer t takes the closed-form value (1+fc)/N.
    """
    t = np.asarray(t, dtype=np.float64)
    s = np.sin(np.pi * t)
    near_zero = np.isclose(s, 0.0, atol=1e-15)
    s_safe = np.where(near_zero, 1.0, s)
    ratio = np.sin((1 + cutoff) * np.pi * t) / s_safe
    out = ratio**2 / ((1 + cutoff) * size)
    out = np.where(near_zero, (1 + cutoff) / size, out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Poisson photon noise
# ---------------------------------------------------------------------------
#
# Sampling is pinned to a fixed algorithm so that a seed reproduces the same
# draws everywhere: sequential inversion for means below 30, Hormann's PTRS
# transformed rejection above.  Both consume uniforms from numpy's PCG64.

_POISSON_SPLIT = 30.0


def _poisson_inversion(rng: np.random.Generator, lam: float) -> int:
    limit = math.exp(-lam)
    k = 0
    p = rng.random()
    while p > limit:
        p *= rng.random()
        k += 1
    return k


def _poisson_ptrs(rng: np.random.Generator, lam: float) -> int:
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= v_r:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
        if lhs <= k * loglam - lam - math.lgamma(k + 1.0):
            return k


def poisson_sample(rng: np.random.Generator, mean) -> np.ndarray:
    """Poisson draws with the pinned inversion/PTRS algorithm."""
    mean = np.asarray(mean, dtype=np.float64)
    if mean.size and float(mean.min()) < 0.0:
        raise ValueError("Poisson means must be nonnegative")
    flat = mean.ravel()
    out = np.zeros(flat.shape, dtype=np.int64)
    for i, lam in enumerate(flat):
        if lam == 0.0:
            continue
        if lam < _POISSON_SPLIT:
            out[i] = _poisson_inversion(rng, lam)
        else:
            out[i] = _poisson_ptrs(rng, lam)
    return out.reshape(mean.shape)


def add_poisson_noise(signal: GridSignal, seed: int) -> GridSignal:
    """Replace each entry by a Poisson draw with that entry as its mean.

    Deterministic for a fixed seed.  The noise realization is the
    difference between the returned signal and the input.
    """
    values = signal.values
    if values.size and float(values.min()) < 0.0:
        raise ValueError("Poisson noise requires a nonnegative signal")
    rng = np.random.default_rng(seed)
    noisy = poisson_sample(rng, values).astype(np.float64)
    return GridSignal(signal.grid, noisy, nonneg=True)
