import numpy as np
import pytest

from spikesr import (
    CertificateError,
    Grid,
    GridSignal,
    RayleighParams,
    SupportSet,
    build_2d_certificate,
    build_separated_certificate,
    calpha,
    certified_error_bound,
    classical_certificate,
    flat_operator,
    product_certificate,
    sample_support,
    solve,
    stability_constant,
    stability_constant_alpha,
)
from spikesr.scenes import scaled_poisson_noise
from spikesr.solver import SolverConfig


def band_energy_outside(cert):
    """Fraction of spectral energy outside the certificate band, measured
    from the sampled values (independent of the stored coefficients)."""
    vals = cert.grid_values()
    if cert.grid.dimension == 1:
        spectrum = np.fft.fft(vals) / cert.grid.size
        k = np.fft.fftfreq(cert.grid.size, d=1 / cert.grid.size).astype(int)
        outside = np.abs(spectrum[np.abs(k) > cert.band_limit]) ** 2
    else:
        spectrum = np.fft.fft2(vals) / cert.grid.size**2
        k = np.fft.fftfreq(cert.grid.size, d=1 / cert.grid.size).astype(int)
        mask = (np.abs(k)[:, None] > cert.band_limit) | (np.abs(k)[None, :] > cert.band_limit)
        outside = np.abs(spectrum[mask]) ** 2
    total = (np.abs(vals) ** 2).sum() / vals.size
    return float(outside.sum() / max(total, 1e-300))


class TestSeparated1D:
    def test_empty_support_is_constant_one(self):
        g = Grid(1, 1028, 128)
        cert = build_separated_certificate(SupportSet(g, []), 128)
        assert cert.rho == pytest.approx(0.5)
        np.testing.assert_allclose(cert.dense_values(4), 1.0, atol=1e-12)

    def test_single_root_growth(self):
        g = Grid(1, 1028, 128)
        cert = build_separated_certificate(SupportSet.from_flat(g, [0]), 128)
        # the published guarantee is a floor: the built object must beat it
        assert cert.evaluate([1 / 1028])[0] >= 0.029 * 128**2 / 1028**2
        assert cert.growth_c1 is not None and cert.growth_c1 >= 0.029
        assert cert.rho > 0

    def test_two_roots_invariants(self):
        g = Grid(1, 1028, 128)
        sep = round(2 * 1028 / 128)  # two cutoff wavelengths in grid steps
        cert = build_separated_certificate(SupportSet.from_flat(g, [100, 100 + sep]), 128)
        assert cert.sup_norm <= 1.0 + 1e-12
        assert cert.min_value >= -1e-9
        assert cert.root_residual <= 1e-8
        assert band_energy_outside(cert) <= 1e-9

    def test_root_interpolation_with_derivative(self):
        g = Grid(1, 512, 64)
        T = SupportSet.from_flat(g, [50, 200, 400])
        cert = build_separated_certificate(T, 64)
        pos = T.positions()[:, 0]
        vals = cert.evaluate(pos)
        ders = cert.evaluate(pos, derivative=1)
        assert np.abs(vals).max() <= 1e-8
        assert np.abs(ders).max() / (2 * np.pi * 64) <= 1e-8

    def test_unseparated_support_rejected(self):
        g = Grid(1, 512, 64)
        with pytest.raises(CertificateError, match="R\\(3.74"):
            build_separated_certificate(SupportSet.from_flat(g, [10, 12]), 64)

    def test_separation_parameter_configurable(self):
        g = Grid(1, 512, 64)
        # 11 steps = 1.375 wavelengths: above the 2.52 window, below 3.74
        sep_steps = 11
        T = SupportSet.from_flat(g, [10, 10 + sep_steps])
        with pytest.raises(CertificateError):
            build_separated_certificate(T, 64, min_separation=3.74)
        cert = build_separated_certificate(T, 64, min_separation=2.52)
        assert cert.rho > 0


class TestClassical:
    def test_single_root_slow_growth(self):
        g = Grid(1, 1028, 128)
        cert = classical_certificate(SupportSet.from_flat(g, [0]))
        assert cert.evaluate([1 / 1028])[0] <= np.pi**2 / 1028**2

    def test_exact_zeros(self):
        g = Grid(1, 256, 16)
        T = SupportSet.from_flat(g, [10, 70, 150])
        cert = classical_certificate(T)
        assert np.abs(cert.evaluate(T.positions()[:, 0])).max() <= 1e-12

    def test_sup_norm_attained_at_antipode(self):
        g = Grid(1, 256, 16)
        cert = classical_certificate(SupportSet.from_flat(g, [0]))
        assert cert.evaluate([0.5])[0] == pytest.approx(1.0, abs=1e-12)
        assert cert.sup_norm == pytest.approx(1.0, abs=1e-9)

    def test_too_many_roots_rejected(self):
        g = Grid(1, 64, 3)
        with pytest.raises(ValueError, match="roots"):
            classical_certificate(SupportSet.from_flat(g, [0, 10, 20, 30]))

    def test_fast_construction_dominates_classical(self):
        # both vanish at the root; the interpolated one climbs much faster,
        # by at least (f/pi)^2 times its measured growth constant
        g = Grid(1, 1028, 128)
        T = SupportSet.from_flat(g, [0])
        fast = build_separated_certificate(T, 128)
        slow = classical_certificate(T)
        ratio = fast.evaluate([1 / 1028])[0] / slow.evaluate([1 / 1028])[0]
        assert ratio >= 10
        assert ratio >= (128 / np.pi) ** 2 * fast.growth_c1


class TestProduct:
    def test_r1_reduces_to_separated(self):
        g = Grid(1, 512, 64)
        T = sample_support(RayleighParams(3.74, 1, g), 4, seed=0)
        single = build_separated_certificate(T, 64)
        prod = product_certificate(T, 1)
        np.testing.assert_allclose(prod.coeffs, single.coeffs, atol=1e-12)

    def test_vanishes_on_whole_support(self):
        g = Grid(1, 1028, 128)
        T = sample_support(RayleighParams(7.48, 2, g), 6, seed=1)
        cert = product_certificate(T, 2)
        vals = cert.evaluate(T.positions()[:, 0])
        assert np.abs(vals).max() <= 1e-8
        assert cert.sup_norm <= 1.0 + 1e-12
        assert cert.min_value >= -1e-9

    def test_band_limit_additivity(self):
        g = Grid(1, 1028, 128)
        T = sample_support(RayleighParams(7.48, 2, g), 4, seed=2)
        cert = product_certificate(T, 2)
        assert cert.band_limit == 2 * (128 // 2)
        assert band_energy_outside(cert) <= 1e-9

    def test_rho_beats_factor_growth_formula(self):
        # rho >= (1/2) * (min factor growth)^r * (fc/r)^(2r) / N^(2r)
        g = Grid(1, 1028, 128)
        for seed in range(3):
            T = sample_support(RayleighParams(7.48, 2, g), 6, seed=seed)
            cert = product_certificate(T, 2)
            c1 = min(cert.factor_growth)
            floor = 0.5 * c1**2 * (64 / 1028) ** 4
            assert cert.rho >= floor * (1 - 1e-9)

    def test_odd_cutoff_rounded_down(self):
        g = Grid(1, 1030, 129)  # 129 not divisible by 2
        T = sample_support(RayleighParams(7.48, 2, g), 4, seed=3)
        cert = product_certificate(T, 2)
        assert cert.band_limit == 2 * (129 // 2) == 128


class TestErrorBound:
    def test_formula_at_half(self):
        g = Grid(1, 64, 8)
        cert = build_separated_certificate(SupportSet(g, []), 8)
        assert certified_error_bound(cert, 3.0) == pytest.approx(6.0)

    def test_zero_noise(self):
        g = Grid(1, 64, 8)
        cert = build_separated_certificate(SupportSet(g, []), 8)
        assert certified_error_bound(cert, 0.0) == 0.0

    def test_invalid_rho_rejected(self):
        g = Grid(1, 64, 8)
        cert = build_separated_certificate(SupportSet(g, []), 8)
        cert.rho = 0.7
        with pytest.raises(ValueError):
            certified_error_bound(cert, 1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_bound_dominates_recovery_error(self, seed):
        # end-to-end: certificate on the negative error set bounds the error
        g = Grid(1, 516, 64)
        op = flat_operator(g)
        T = sample_support(RayleighParams(3.74, 1, g), 4, seed=seed)
        rng = np.random.default_rng(seed + 50)
        x = GridSignal.from_spikes(g, T.indices, rng.uniform(0.5, 2.0, len(T)))
        z = scaled_poisson_noise(x, 1e-4 * x.l1(), seed + 77)
        s = GridSignal(g, op.apply(x).values + z)
        res = solve(op, s, SolverConfig(final_iter=3000))
        h = res.x_hat.values - x.values
        neg = SupportSet.from_flat(g, np.nonzero(h < 0)[0])
        cert = build_separated_certificate(neg, 64)
        bound = certified_error_bound(cert, float(np.abs(z).sum()))
        assert np.abs(h).sum() <= bound


class TestConstants:
    def test_flat_constant_values(self):
        assert stability_constant(1) == pytest.approx(4 * 67.79)
        assert stability_constant(2) == pytest.approx(4 * 67.79**2 * 16)

    def test_flattened_constant_composition(self):
        assert stability_constant_alpha(1, 0.5) == pytest.approx(4 * 67.79 * calpha(0.5) * 4)

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            stability_constant(0)
        with pytest.raises(ValueError):
            stability_constant_alpha(1, 0.4)


class Test2D:
    def test_empty(self):
        g = Grid(2, 64, 8)
        cert = build_2d_certificate(SupportSet(g, []), 8)
        assert cert.rho == pytest.approx(0.5)

    def test_single_root_quadratic_growth(self):
        # log-log fit of ring-averaged values against radius gives slope 2
        g = Grid(2, 64, 8)
        cert = build_2d_certificate(SupportSet(g, [(10, 20)]), 8)
        dense = cert.dense_values(16)
        m = dense.shape[0]
        center = np.array([10, 20]) / 64
        radii = np.geomspace(0.002, 0.17 / 8, 10)
        means = []
        for rad in radii:
            ring = []
            for ang in np.linspace(0, 2 * np.pi, 17)[:-1]:
                u = (center[0] + rad * np.cos(ang)) % 1.0
                v = (center[1] + rad * np.sin(ang)) % 1.0
                ring.append(dense[round(u * m) % m, round(v * m) % m])
            means.append(np.mean(ring))
        slope = np.polyfit(np.log(radii), np.log(means), 1)[0]
        assert abs(slope - 2.0) <= 0.1

    def test_separated_config_invariants(self):
        g = Grid(2, 96, 16)
        pts = [(5, 5), (5, 48), (48, 5), (48, 48), (20, 25), (20, 70), (70, 28), (70, 70)]
        cert = build_2d_certificate(SupportSet(g, pts), 16)
        assert cert.sup_norm <= 1.0 + 1e-12
        assert cert.min_value >= -1e-9
        assert cert.root_residual <= 1e-8
        assert cert.rho > 0
        assert band_energy_outside(cert) <= 1e-9

    def test_unseparated_rejected(self):
        g = Grid(2, 96, 16)
        with pytest.raises(CertificateError):
            build_2d_certificate(SupportSet(g, [(0, 0), (0, 3)]), 16)
