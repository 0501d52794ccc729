import numpy as np
import pytest

from eventlink import BlurryImage, FrameSequence, synthesize_blur


class TestBlurryImage:
    def test_requires_positive_exposure(self):
        with pytest.raises(ValueError):
            BlurryImage(np.zeros((4, 4)), 0.5, 0.0)

    def test_rejects_out_of_range_pixels(self):
        with pytest.raises(ValueError):
            BlurryImage(np.full((4, 4), 1.2), 0.5, 1.0)

    def test_exposure_window(self):
        b = BlurryImage(np.zeros((4, 4)), 0.5, 1.0)
        assert b.exposure == (0.0, 1.0)


class TestSynthesize:
    def test_identical_frames_equal_any_frame(self):
        frame = np.random.default_rng(0).uniform(0, 1, (5, 6))
        fs = FrameSequence(np.stack([frame] * 4), np.arange(4.0))
        out = synthesize_blur(fs)
        np.testing.assert_array_equal(out.pixels, frame)
        assert out.t_f == 1.5 and out.T == 3.0

    def test_constant_mean(self):
        fs = FrameSequence(np.stack([np.full((3, 3), 0.2),
                                     np.full((3, 3), 0.4)]), [0.0, 1.0])
        np.testing.assert_allclose(synthesize_blur(fs).pixels, 0.3)

    def test_matches_per_pixel_mean_oracle(self):
        rng = np.random.default_rng(2)
        stack = rng.uniform(0, 1, (9, 8, 7))
        fs = FrameSequence(stack, np.arange(9.0))
        out = synthesize_blur(fs)
        expected = np.empty((8, 7))
        for y in range(8):
            for x in range(7):
                expected[y, x] = sum(stack[k, y, x] for k in range(9)) / 9
        np.testing.assert_allclose(out.pixels, expected, atol=1e-12)

    def test_multichannel_average(self):
        rng = np.random.default_rng(3)
        stack = rng.uniform(0, 1, (4, 5, 5, 3))
        out = synthesize_blur(FrameSequence(stack, np.arange(4.0)))
        np.testing.assert_allclose(out.pixels, stack.mean(axis=0))

    def test_mean_bounds(self):
        rng = np.random.default_rng(4)
        stack = rng.uniform(0, 1, (6, 4, 4))
        out = synthesize_blur(FrameSequence(stack, np.arange(6.0)))
        assert np.all(out.pixels >= stack.min(axis=0) - 1e-12)
        assert np.all(out.pixels <= stack.max(axis=0) + 1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        stack = rng.uniform(0, 1, (5, 4, 4))
        a = synthesize_blur(FrameSequence(stack, np.arange(5.0)))
        b = synthesize_blur(FrameSequence(stack[::-1].copy(), np.arange(5.0)))
        np.testing.assert_allclose(a.pixels, b.pixels, atol=1e-12)

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError):
            synthesize_blur(FrameSequence(np.zeros((0, 4, 4)), []))
