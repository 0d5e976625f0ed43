import numpy as np
import pytest

from khalasi.flows import Rect, StillWater, UniformFlow, double_gyre, GyreField
from khalasi.recon import (
    FlowSampleWindow,
    GprHyperparams,
    ReconGrid,
    mae_vs_truth,
    posterior_at_inputs,
    reconstruct,
    zero_recon_grid,
)

HP = GprHyperparams(signal_var=1.0, space_scale=10.0, time_scale=25.0, noise_var=1e-10)


def window_from(samples, capacity=55):
    w = FlowSampleWindow(capacity)
    for pos, t, v in samples:
        w.push(pos, t, v)
    return w


def scattered_window(n=20, seed=0, capacity=55):
    rng = np.random.default_rng(seed)
    samples = []
    t = 0.0
    for _ in range(n):
        t += rng.uniform(0.5, 2.0)
        samples.append((rng.uniform(0, 100, 2), t, rng.normal(0, 0.3, 2)))
    return window_from(samples, capacity)


class TestWindow:
    def test_push_grows(self):
        w = FlowSampleWindow()
        w.push((0, 0), 0.0, (1, 0))
        assert len(w) == 1

    def test_capacity_evicts_oldest(self):
        w = FlowSampleWindow(55)
        for k in range(56):
            w.push((k, 0), float(k), (0, 0))
        assert len(w) == 55
        _, times, _ = w.arrays()
        assert times[0] == 1.0  # t=0 evicted

    def test_non_monotone_rejected(self):
        w = FlowSampleWindow()
        w.push((0, 0), 5.0, (0, 0))
        with pytest.raises(ValueError):
            w.push((1, 0), 5.0, (0, 0))
        with pytest.raises(ValueError):
            w.push((1, 0), 4.0, (0, 0))


class TestPosterior:
    def test_interpolates_noiseless_observation(self):
        # grid spacing 0.5 around center (0,0): node (31.5 - 31) * 0.5 = 0.25 off;
        # center the grid so one node lands exactly on the sample
        w = window_from([((0.25, 0.25), 3.0, (0.4, -0.2))])
        grid = reconstruct(w, HP, center=(0.0, 0.0), t_now=3.0)
        # node index 32 on each axis sits at +0.25
        assert grid.vx[32, 32] == pytest.approx(0.4, abs=1e-6)
        assert grid.vy[32, 32] == pytest.approx(-0.2, abs=1e-6)
        assert grid.sx[32, 32] == pytest.approx(0.0, abs=1e-4)

    def test_mean_at_training_inputs(self):
        w = scattered_window(25, seed=2)
        _, _, vals = w.arrays()
        post = posterior_at_inputs(w, HP)
        np.testing.assert_allclose(post, vals, atol=1e-6)

    def test_prior_recovery_far_away(self):
        w = window_from([((0.0, 0.0), 0.0, (0.9, 0.3))])
        grid = reconstruct(w, HP, center=(1e5, 1e5), t_now=0.0)
        np.testing.assert_allclose(grid.vx, 0.0, atol=1e-9)
        np.testing.assert_allclose(grid.sx, np.sqrt(HP.signal_var), rtol=1e-9)

    def test_variance_never_increases_with_data(self):
        w = scattered_window(15, seed=3)
        grid_before = reconstruct(w, HP, center=(50.0, 50.0), t_now=40.0)
        w.push((50.0, 50.0), 39.0, (0.1, 0.1))
        grid_after = reconstruct(w, HP, center=(50.0, 50.0), t_now=40.0)
        assert np.all(grid_after.sx <= grid_before.sx + 1e-9)

    def test_translation_invariance(self):
        shift = np.array([123.0, -45.0])
        samples = [(np.array([x, y]), t, np.array([vx, vy]))
                   for (x, y, t, vx, vy) in [(0, 0, 1, .1, .2), (5, 3, 2, -.1, 0), (2, 8, 3, .3, .1)]]
        w1 = window_from(samples)
        w2 = window_from([(p + shift, t, v) for p, t, v in samples])
        g1 = reconstruct(w1, HP, center=(3.0, 3.0), t_now=4.0)
        g2 = reconstruct(w2, HP, center=shift + (3.0, 3.0), t_now=4.0)
        np.testing.assert_allclose(g1.vx, g2.vx, atol=1e-10)
        np.testing.assert_allclose(g1.sx, g2.sx, atol=1e-10)

    def test_signal_var_scales_prior_variance(self):
        w = window_from([((0.0, 0.0), 0.0, (0.5, 0.5))])
        hp2 = GprHyperparams(signal_var=2.0, space_scale=10.0, time_scale=25.0, noise_var=1e-10)
        g1 = reconstruct(w, HP, center=(1e4, 1e4), t_now=0.0)
        g2 = reconstruct(w, hp2, center=(1e4, 1e4), t_now=0.0)
        ratio = (g2.sx ** 2) / (g1.sx ** 2)
        np.testing.assert_allclose(ratio, 2.0, rtol=0.01)

    def test_empty_window_rejected(self):
        from khalasi.errors import ReconstructionError
        with pytest.raises(ReconstructionError):
            reconstruct(FlowSampleWindow(), HP, center=(0, 0), t_now=0.0)


class TestMae:
    def test_zero_for_exact_copy(self):
        field = UniformFlow(Rect(0, 300, 0, 100), (0.25, -0.1))
        grid = zero_recon_grid((150.0, 50.0), 0.0)
        grid.vx[:] = 0.25
        grid.vy[:] = -0.1
        mae, excluded = mae_vs_truth(grid, field, 0.0)
        assert mae == 0.0 and excluded == 0

    def test_uniform_offset_gives_offset(self):
        field = UniformFlow(Rect(0, 300, 0, 100), (0.25, -0.1))
        grid = zero_recon_grid((150.0, 50.0), 0.0)
        grid.vx[:] = 0.25 + 0.07
        grid.vy[:] = -0.1 + 0.07
        mae, _ = mae_vs_truth(grid, field, 0.0)
        assert mae == pytest.approx(0.07)

    def test_partial_overlap_reports_excluded(self):
        field = UniformFlow(Rect(0, 300, 0, 100), (0.0, 0.0))
        grid = zero_recon_grid((2.0, 50.0), 0.0)  # half the grid hangs outside
        _, excluded = mae_vs_truth(grid, field, 0.0)
        assert excluded > 0

    def test_all_outside_raises(self):
        field = UniformFlow(Rect(0, 300, 0, 100), (0.0, 0.0))
        grid = zero_recon_grid((1000.0, 1000.0), 0.0)
        with pytest.raises(ValueError):
            mae_vs_truth(grid, field, 0.0)


def test_window_size_trend_on_gyre():
    """More history beats a short window along a moving-sensor track."""
    from khalasi.gprbench import window_sweep_mae

    result = window_sweep_mae("gyre2", windows=(10, 55), n_eval=6, seed=0)
    assert result[55][0] < result[10][0]
