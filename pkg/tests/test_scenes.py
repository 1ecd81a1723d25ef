import numpy as np
import pytest

from spikesr import Grid, GridSignal, is_regular, RayleighParams, SupportSet
from spikesr.scenes import (
    detect_spikes,
    detection_scores,
    match_radius,
    multi_density_scene,
    scaled_poisson_noise,
)


class TestNoiseRecipe:
    def test_exact_target_size(self):
        g = Grid(1, 128, 16)
        x = GridSignal.from_spikes(g, [(10,), (60,)], [100.0, 200.0])
        z = scaled_poisson_noise(x, 0.5, seed=3)
        assert np.abs(z).sum() == pytest.approx(0.5, rel=1e-12)

    def test_deterministic(self):
        g = Grid(1, 128, 16)
        x = GridSignal.from_spikes(g, [(10,)], [100.0])
        a = scaled_poisson_noise(x, 0.5, seed=3)
        b = scaled_poisson_noise(x, 0.5, seed=3)
        assert np.array_equal(a, b)

    def test_zero_target(self):
        g = Grid(1, 128, 16)
        x = GridSignal.from_spikes(g, [(10,)], [100.0])
        assert np.abs(scaled_poisson_noise(x, 0.0, seed=3)).sum() == 0.0


class TestDetection:
    def test_single_blob(self):
        values = np.zeros((32, 32))
        values[10, 12] = 5.0
        values[10, 13] = 3.0
        values[11, 12] = 2.0
        dets = detect_spikes(values)
        assert len(dets) == 1
        com, mass = dets[0]
        assert mass == pytest.approx(10.0)
        assert com[0] == pytest.approx(10.2)
        assert com[1] == pytest.approx(12.3)

    def test_bridged_pair_splits(self):
        # two lobes joined by a low bridge must give two detections
        values = np.zeros((32, 32))
        values[10, 10] = 5.0
        values[11, 11] = 1.0
        values[12, 12] = 0.8
        values[13, 13] = 1.2
        values[14, 14] = 6.0
        dets = detect_spikes(values, threshold_frac=0.05, peak_radius=2)
        assert len(dets) == 2

    def test_torus_wrap(self):
        values = np.zeros(32)
        values[31] = 2.0
        values[0] = 4.0
        values[1] = 2.0
        dets = detect_spikes(values)
        assert len(dets) == 1
        assert dets[0][0][0] == pytest.approx(0.0, abs=1e-9)

    def test_empty(self):
        assert detect_spikes(np.zeros((8, 8))) == []

    def test_scores_greedy_matching(self):
        true_pts = [(10, 10), (20, 20)]
        dets = [((10.4, 9.8), 5.0), ((25.0, 25.0), 1.0)]
        precision, recall, matches = detection_scores(true_pts, dets, radius=2, n=32)
        assert precision == 0.5 and recall == 0.5 and len(matches) == 1

    def test_scores_radius_enforced(self):
        precision, recall, _ = detection_scores([(10, 10)], [((14, 14), 1.0)], radius=3, n=32)
        assert recall == 0.0


class TestMultiDensityScene:
    def test_layout_and_classes(self):
        g = Grid(2, 200, 10)
        signal, regions = multi_density_scene(g, seed=0)
        names = [r.name for r in regions]
        assert names == ["i", "ii", "iii", "iv", "v"]
        by_name = {r.name: r for r in regions}
        # every region's points stay inside its box
        for reg in regions:
            for p in reg.points:
                assert reg.contains(p)
        # regional class membership (for the sampled regions)
        for name in ("i", "ii"):
            reg = by_name[name]
            ok, _ = is_regular(
                SupportSet(g, reg.points), RayleighParams(reg.d, 1, g)
            )
            assert ok, name
        for name in ("iii", "iv"):
            reg = by_name[name]
            ok, _ = is_regular(
                SupportSet(g, reg.points), RayleighParams(reg.d, 2, g)
            )
            assert ok, name
        # the co-located triple sits inside one Nyquist cell
        v = by_name["v"].points
        cell = g.size / (2 * g.cutoff)
        for a in v:
            for b in v:
                assert g.chebyshev_distance(a, b) <= cell / g.size

    def test_all_sources_same_magnitude(self):
        g = Grid(2, 200, 10)
        signal, regions = multi_density_scene(g, seed=1, amplitude=10000.0)
        nz = signal.values[signal.values > 0]
        assert np.all(nz == 10000.0)
        assert len(nz) == sum(len(r.points) for r in regions)

    def test_deterministic(self):
        g = Grid(2, 200, 10)
        a, _ = multi_density_scene(g, seed=2)
        b, _ = multi_density_scene(g, seed=2)
        assert np.array_equal(a.values, b.values)

    def test_match_radius(self):
        assert match_radius(Grid(2, 200, 10)) == 5
        assert match_radius(Grid(2, 390, 19)) == 5
