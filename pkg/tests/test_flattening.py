import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikesr import (
    FourierMultiplier,
    Grid,
    SupportSet,
    build_flattening_filter,
    build_separated_certificate,
    calpha,
    make_triangular_spectrum,
    operator_one_norm,
    second_difference_spectrum_bound,
)


class TestCalpha:
    def test_published_values(self):
        assert calpha(0.5) == pytest.approx(7.22, abs=1e-9)
        assert calpha(0.75) == pytest.approx(18.38, abs=1e-9)

    def test_diverges_near_one(self):
        assert calpha(0.99) > 1e3

    def test_domain(self):
        with pytest.raises(ValueError):
            calpha(0.4)
        with pytest.raises(ValueError):
            calpha(1.0)


class TestFilterConstruction:
    def test_flat_region_inverts_triangle(self):
        g = Grid(1, 512, 64)
        filt = build_flattening_filter(g, 0.5)
        tri = make_triangular_spectrum(g)
        k = g.frequencies()
        product = filt.multiplier.coeffs * tri.coeffs
        flat = np.abs(k) <= 32
        np.testing.assert_allclose(product[flat], 1.0, atol=1e-12)

    def test_zero_beyond_cutoff(self):
        g = Grid(1, 512, 64)
        filt = build_flattening_filter(g, 0.5)
        k = g.frequencies()
        assert np.abs(filt.multiplier.coeffs[np.abs(k) > 64]).max() == 0.0

    def test_ramp_parameters(self):
        g = Grid(1, 512, 64)
        filt = build_flattening_filter(g, 0.5)
        gap = 64 * 0.5
        assert filt.a == pytest.approx(-1.0 / ((gap + 1) * gap))
        assert filt.b == pytest.approx(1.0 / ((gap + 1) * 0.5))

    def test_ramp_seam_values(self):
        # the two branch values at the seam stay close for large cutoffs
        g = Grid(1, 2048, 256)
        filt = build_flattening_filter(g, 0.5)
        fc, cut = 256, 128
        flat_end = (fc + 1) / (fc + 1 - cut)
        ramp_start = (fc + 1) * (filt.a * (cut + 1) + filt.b)
        assert flat_end > 0 and ramp_start > 0
        assert ramp_start / flat_end == pytest.approx(1.0, abs=0.05)

    def test_non_integer_cut_rejected(self):
        g = Grid(1, 512, 63)
        with pytest.raises(ValueError, match="integer"):
            build_flattening_filter(g, 0.5)

    def test_alpha_domain(self):
        g = Grid(1, 512, 64)
        with pytest.raises(ValueError):
            build_flattening_filter(g, 0.25)


class TestOperatorNorm:
    def test_identity_spectrum(self):
        g = Grid(1, 128, 16)
        ident = FourierMultiplier(g, np.ones(128))
        assert operator_one_norm(ident) == pytest.approx(1.0, abs=1e-12)

    def test_matches_explicit_circulant_column(self):
        # oracle: materialize the operator matrix and take max column l1
        g = Grid(1, 64, 8)
        filt = build_flattening_filter(g, 0.5)
        op = filt.as_operator()
        mat = np.column_stack([op.apply_values(np.eye(64)[j]) for j in range(64)])
        explicit = np.abs(mat).sum(axis=0).max()
        assert operator_one_norm(filt) == pytest.approx(explicit, rel=1e-10)

    @pytest.mark.parametrize("alpha,budget", [(0.5, 7.22), (0.75, 18.38)])
    @pytest.mark.parametrize("n,srf", [(128, 4), (512, 4), (512, 8), (2048, 8)])
    def test_norm_within_budget(self, alpha, budget, n, srf):
        divisor = 4
        fc = max(divisor, round(n / (2 * srf * divisor)) * divisor)
        filt = build_flattening_filter(Grid(1, n, fc), alpha)
        assert filt.one_norm <= budget + 1e-9


class TestCertificateCompatibility:
    def test_flattened_operator_fixes_bandlimited_certificates(self):
        g = Grid(1, 512, 64)
        filt = build_flattening_filter(g, 0.5)
        flat_op = filt.flattened_operator()
        T = SupportSet.from_flat(g, [100, 260])
        cert = build_separated_certificate(T, 32)  # band-limited to alpha*fc
        q = cert.grid_values()
        np.testing.assert_allclose(flat_op.apply_values(q), q, atol=1e-9)


class TestSecondDifferenceBound:
    def test_constant_sequence(self):
        x = np.full(64, 3.0)
        # zero second differences: every nonzero-frequency coefficient is 0
        assert second_difference_spectrum_bound(x) <= 1e-12

    def test_filter_spectrum_obeys_bound(self):
        g = Grid(1, 512, 64)
        filt = build_flattening_filter(g, 0.5)
        assert second_difference_spectrum_bound(filt.multiplier.coeffs) <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_smooth_sequences(self, seed):
        rng = np.random.default_rng(seed)
        increments = rng.normal(0, 0.1, 64)
        x = np.cumsum(increments)
        x -= np.linspace(0, x[-1] + increments.mean(), 64)  # keep it periodic-ish
        assert second_difference_spectrum_bound(x) <= 1e-10

    def test_oracle_coefficients(self):
        # independent check of the coefficient path used inside the bound
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, 32)
        coeffs = np.sqrt(32) * np.fft.ifft(x)
        direct = np.array(
            [np.sum(x * np.exp(2j * np.pi * np.arange(32) * k / 32)) for k in range(32)]
        ) / np.sqrt(32)
        np.testing.assert_allclose(coeffs, direct, atol=1e-10)
