import numpy as np
import pytest

from asnrc.errors import DimensionError
from asnrc.tasks.glyphs import (DistortionParams, GlyphVideoSpec, available_glyphs, distort_frame,
                                load_glyph, make_video, parse_glyph)


def test_shipped_glyphs_are_binary_8x8():
    names = available_glyphs()
    assert {"I", "7", "L", "T", "O", "X"} <= set(names)
    for name in names:
        g = load_glyph(name)
        assert g.shape == (8, 8)
        assert set(np.unique(g)) <= {0.0, 1.0}


def test_parse_glyph_errors():
    with pytest.raises(DimensionError):
        parse_glyph("010\n01\n")
    with pytest.raises(ValueError):
        parse_glyph("012\n")
    with pytest.raises(ValueError):
        parse_glyph("\n\n")


def test_load_unknown_glyph():
    with pytest.raises(FileNotFoundError):
        load_glyph("no-such-glyph")


def test_clean_channel_keeps_the_tanh():
    frame = np.zeros((8, 8))
    frame[3, 4] = 1.0
    out = distort_frame(frame, 0, DistortionParams.clean(), seed=0)
    assert out[3, 4] == pytest.approx(0.96403, abs=1e-5)
    assert out[0, 0] == 0.0


def test_vanishing_nonlinearity_flattens_the_frame():
    frame = np.ones((8, 8))
    out = distort_frame(frame, 5, DistortionParams.clean(nonlinearity_gain=1e-9), seed=0)
    np.testing.assert_allclose(out, 0.0, atol=1e-8)


def test_distortion_is_deterministic_per_frame():
    frame = load_glyph("I")
    d = DistortionParams()
    np.testing.assert_array_equal(distort_frame(frame, 7, d, 11), distort_frame(frame, 7, d, 11))
    assert not np.array_equal(distort_frame(frame, 7, d, 11), distort_frame(frame, 8, d, 11))


def test_make_video_shapes_and_segments():
    spec = GlyphVideoSpec(glyphs=["I", "7"], frames_per_glyph=8, total_frames=100, seed=2)
    clean, noisy, labels = make_video(spec)
    assert clean.shape == noisy.shape == (100, 8, 8)
    assert len(labels) == 100
    for start in range(0, 100, 8):
        assert len(set(labels[start:start + 8])) == 1
    for k, name in enumerate(labels):
        np.testing.assert_array_equal(clean[k], load_glyph(name))


def test_make_video_is_reproducible():
    spec = GlyphVideoSpec(total_frames=40, seed=5)
    a = make_video(spec)
    b = make_video(spec)
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2] == b[2]
