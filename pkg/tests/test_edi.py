import math

import numpy as np
import pytest

from eventlink import (BlurryImage, DeblurConfig, Event, EventStream,
                       FrameSequence, SimulatorConfig, accumulate,
                       estimate_threshold, exposure_sample_times,
                       latent_at_midpoint, latent_at_time, psnr,
                       simulate_events, synthesize_blur)
from eventlink.edi import reblur

from oracles import moving_edge_frames


def random_stream(rng, width=6, height=6, n=40, t_start=0.0, t_end=1.0):
    events = [Event(int(rng.integers(width)), int(rng.integers(height)),
                    float(rng.uniform(t_start, t_end)), int(rng.choice([-1, 1])))
              for _ in range(n)]
    return EventStream.from_events(events, width, height, t_start, t_end)


def step_case():
    """1x1 step signal: 0.1 before t=0.5, 0.1*e^0.25 after; c = 0.05."""
    hi = 0.1 * math.exp(0.25)
    frames = FrameSequence(
        np.array([0.1, 0.1, hi, hi]).reshape(4, 1, 1),
        [0.0, 0.4999, 0.5, 1.0])
    stream = simulate_events(frames, SimulatorConfig(c=0.05))
    blur = synthesize_blur(frames)
    return frames, stream, blur


class TestLatentAtMidpoint:
    def test_empty_stream_returns_blur_exactly(self):
        blur = BlurryImage(np.random.default_rng(0).uniform(0, 1, (4, 4)),
                           0.5, 1.0)
        stream = EventStream.empty(4, 4, 0.0, 1.0)
        out = latent_at_midpoint(blur, stream, DeblurConfig(c=0.05))
        np.testing.assert_array_equal(out, blur.pixels)

    def test_step_signal_recovery(self):
        frames, stream, blur = step_case()
        cfg = DeblurConfig(c=0.05, samples=64)
        out = latent_at_midpoint(blur, stream, cfg)

        # closed-form divisor: 5 negative counts before the step, 0 after
        times = exposure_sample_times(blur.t_f, blur.T, 64)
        d = np.mean([math.exp(0.05 * accumulate(stream, 0, 0, blur.t_f, t))
                     for t in times])
        assert out[0, 0] == pytest.approx(blur.pixels[0, 0] / d, abs=1e-12)
        # log-domain error below c + O(1/M)
        true_mid = 0.1 * math.exp(0.25)
        assert abs(math.log(out[0, 0]) - math.log(true_mid)) < 0.05 + 4 / 64

    def test_moving_edge_gain_over_blur(self):
        # oracle run measured a 27.95 dB margin at M=64; the criterion is 6
        frames, ts = moving_edge_frames()
        fs = FrameSequence(frames, ts)
        stream = simulate_events(fs, SimulatorConfig(c=0.05))
        blur = synthesize_blur(fs)
        rec = latent_at_midpoint(blur, stream, DeblurConfig(c=0.05, samples=64))
        gt = frames[16]
        assert psnr(gt, rec) - psnr(gt, blur.pixels) > 6.0

    def test_geometry_mismatch_rejected(self):
        blur = BlurryImage(np.zeros((4, 4)), 0.5, 1.0)
        stream = EventStream.empty(5, 5, 0.0, 1.0)
        with pytest.raises(ValueError, match="geometry"):
            latent_at_midpoint(blur, stream, DeblurConfig(c=0.05))

    def test_uncovered_exposure_rejected(self):
        blur = BlurryImage(np.zeros((4, 4)), 0.5, 1.0)
        stream = EventStream.empty(4, 4, 0.2, 1.0)
        with pytest.raises(ValueError, match="cover"):
            latent_at_midpoint(blur, stream, DeblurConfig(c=0.05))

    def test_output_in_unit_range(self):
        rng = np.random.default_rng(1)
        blur = BlurryImage(rng.uniform(0, 1, (6, 6)), 0.5, 1.0)
        stream = random_stream(rng)
        out = latent_at_midpoint(blur, stream, DeblurConfig(c=0.3))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_color_blur_shares_the_event_divisor(self):
        rng = np.random.default_rng(2)
        pix = rng.uniform(0.1, 0.9, (6, 6, 3))
        blur = BlurryImage(pix, 0.5, 1.0)
        stream = random_stream(rng)
        cfg = DeblurConfig(c=0.1)
        out = latent_at_midpoint(blur, stream, cfg, clamp=False)
        mono = latent_at_midpoint(BlurryImage(pix[:, :, 0], 0.5, 1.0),
                                  stream, cfg, clamp=False)
        np.testing.assert_allclose(out[:, :, 0], mono, atol=1e-12)


class TestLatentAtTime:
    def test_identity_at_midpoint(self):
        rng = np.random.default_rng(3)
        sharp = rng.uniform(0, 1, (6, 6))
        stream = random_stream(rng)
        out = latent_at_time(sharp, stream, 0.5, 0.5, DeblurConfig(c=0.1))
        np.testing.assert_array_equal(out, sharp)

    def test_single_event_scales_by_exp_c(self):
        stream = EventStream.from_events([Event(2, 3, 0.7, 1)], 6, 6, 0.0, 1.0)
        sharp = np.full((6, 6), 0.5)
        out = latent_at_time(sharp, stream, 0.5, 0.8, DeblurConfig(c=0.1),
                             clamp=False)
        assert out[3, 2] == pytest.approx(0.5 * math.exp(0.1))
        assert out[0, 0] == 0.5

    def test_time_outside_span_rejected(self):
        stream = EventStream.empty(4, 4, 0.0, 1.0)
        with pytest.raises(ValueError, match="span"):
            latent_at_time(np.zeros((4, 4)), stream, 0.5, 1.5,
                           DeblurConfig(c=0.1))


class TestReblurIdentity:
    def test_reblur_reproduces_blur_preclamp(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            blur = BlurryImage(rng.uniform(0.01, 1, (5, 5)), 0.5, 1.0)
            stream = random_stream(rng, 5, 5, n=int(rng.integers(0, 60)))
            cfg = DeblurConfig(c=float(rng.uniform(0.02, 0.4)),
                               samples=int(rng.integers(2, 80)))
            latent = latent_at_midpoint(blur, stream, cfg, clamp=False)
            back = reblur(latent, stream, blur.t_f, blur.T, cfg, clamp=False)
            np.testing.assert_allclose(back, blur.pixels, atol=1e-6)

    def test_refinement_stagnates_on_step_case(self):
        frames, stream, blur = step_case()
        true_mid = 0.1 * math.exp(0.25)
        errs = {}
        for m in (64, 128):
            out = latent_at_midpoint(blur, stream,
                                     DeblurConfig(c=0.05, samples=m))
            errs[m] = abs(math.log(out[0, 0]) - math.log(true_mid))
        # sample fractions straddling the step are identical at 64 and 128
        assert errs[128] <= errs[64] + 1e-12

    def test_refinement_bounded_on_moving_edge(self):
        frames, ts = moving_edge_frames(width=32, height=32, num_frames=17,
                                        span=8)
        fs = FrameSequence(frames, ts)
        stream = simulate_events(fs, SimulatorConfig(c=0.05))
        blur = synthesize_blur(fs)
        gt = np.log(frames[8])

        def log_err(m):
            out = latent_at_midpoint(blur, stream,
                                     DeblurConfig(c=0.05, samples=m),
                                     clamp=False)
            return np.abs(np.log(out) - gt).mean()

        for m in (16, 32, 64):
            # error at 2M may wobble by roundoff but stays within the
            # M-level discretization bound
            assert log_err(2 * m) <= log_err(m) + 1.0 / m


class TestEstimateThreshold:
    def test_empty_stream_returns_smallest(self):
        blur = BlurryImage(np.full((4, 4), 0.5), 0.5, 1.0)
        stream = EventStream.empty(4, 4, 0.0, 1.0)
        assert estimate_threshold(blur, stream, [0.2, 0.05, 0.1]) == 0.05

    def test_singleton_grid(self):
        blur = BlurryImage(np.full((4, 4), 0.5), 0.5, 1.0)
        stream = EventStream.empty(4, 4, 0.0, 1.0)
        assert estimate_threshold(blur, stream, [0.37]) == 0.37

    def test_empty_grid_rejected(self):
        blur = BlurryImage(np.full((4, 4), 0.5), 0.5, 1.0)
        with pytest.raises(ValueError):
            estimate_threshold(blur, EventStream.empty(4, 4, 0, 1), [])

    def test_nonpositive_candidate_rejected(self):
        blur = BlurryImage(np.full((4, 4), 0.5), 0.5, 1.0)
        with pytest.raises(ValueError):
            estimate_threshold(blur, EventStream.empty(4, 4, 0, 1), [-0.1, 0.2])

    def test_matches_residual_oracle_on_simulated_data(self):
        # NOTE: the re-blur identity holds algebraically for every candidate
        # c, so residuals below the true threshold are clamping/roundoff
        # noise; the estimator reliably rejects only over-large candidates.
        # We therefore assert agreement with a direct residual oracle.
        frames, ts = moving_edge_frames(width=32, height=32, num_frames=17,
                                        span=8)
        fs = FrameSequence(frames, ts)
        stream = simulate_events(fs, SimulatorConfig(c=0.05))
        blur = synthesize_blur(fs)
        grid = [0.01, 0.05, 0.25]
        samples = 32
        times = exposure_sample_times(blur.t_f, blur.T, samples)

        residuals = {}
        for c in grid:
            cfg = DeblurConfig(c=c, samples=samples)
            latent = latent_at_midpoint(blur, stream, cfg)
            back = np.mean([latent_at_time(latent, stream, blur.t_f, t, cfg)
                            for t in times], axis=0)
            residuals[c] = float(np.mean((back - blur.pixels) ** 2))

        best = min(sorted(grid), key=lambda c: residuals[c])
        assert estimate_threshold(blur, stream, grid, samples) == best
        # the over-large candidate is always strictly worse
        assert residuals[0.25] > residuals[0.05]
