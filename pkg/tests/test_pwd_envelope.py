import numpy as np
import pytest

from pwdrecon.core import TARGET_FS, EnvelopePair, TimeSeries
from pwdrecon.errors import ConstantImage, DegenerateInput
from pwdrecon.pwd_envelope import (
    GrayImage,
    detect_baseline_row,
    extract_envelopes,
    normalize_intensity,
    otsu_threshold,
    pca_compress_envelopes,
    preprocess_envelopes,
)


def otsu_oracle(pixels):
    """Exhaustive 256-way scan maximizing between-class variance."""
    hist, _ = np.histogram(pixels, bins=256, range=(0.0, 256.0))
    total = hist.sum()
    best_t, best_var = 0, -1.0
    for t in range(1, 256):
        bg = hist[:t]
        fg = hist[t:]
        nb, nf = bg.sum(), fg.sum()
        if nb == 0 or nf == 0:
            continue
        mu_b = (bg * np.arange(t)).sum() / nb
        mu_f = (fg * np.arange(t, 256)).sum() / nf
        var = (nb / total) * (nf / total) * (mu_b - mu_f) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def test_normalize_intensity():
    img = GrayImage(np.array([[10.0, 20.0], [30.0, 50.0]]))
    out = normalize_intensity(img)
    assert out.pixels.min() == 0.0 and out.pixels.max() == 255.0
    assert out.pixels[0, 1] == pytest.approx((20 - 10) / 40 * 255)
    with pytest.raises(ConstantImage):
        normalize_intensity(GrayImage(np.full((3, 3), 9.0)))


def test_otsu_bimodal_and_oracle_agreement():
    rng = np.random.default_rng(0)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        px = np.clip(np.concatenate([
            rng.normal(40, 12, size=900),
            rng.normal(200, 15, size=300),
        ]), 0, 255).reshape(40, 30)
        img = GrayImage(px)
        t = otsu_threshold(img)
        assert t == otsu_oracle(px)
        assert 60 <= t <= 180  # lands between the two modes


def test_otsu_two_level_image():
    px = np.zeros((10, 10))
    px[:3] = 200.0
    t = otsu_threshold(GrayImage(px))
    assert 1 <= t <= 200
    fg = px >= t
    assert fg.sum() == 30  # exactly the bright block
    with pytest.raises(ConstantImage):
        otsu_threshold(GrayImage(np.full((4, 4), 128.0)))


def test_extract_envelopes_synthetic_columns():
    # column 0: bright rows 2..4 above baseline 5 and row 8 below
    px = np.zeros((10, 4))
    px[2:5, 0] = 255.0
    px[8, 0] = 255.0
    px[5, 1] = 255.0   # only the baseline row itself: ignored
    px[0, 2] = 255.0   # farthest row above
    pair = extract_envelopes(GrayImage(px), threshold=128.0, baseline_row=5,
                             columns_per_second=100.0)
    assert pair.upper.samples.tolist() == [3.0, 0.0, 5.0, 0.0]
    assert pair.lower.samples.tolist() == [-3.0, 0.0, 0.0, 0.0]
    assert pair.fs == 100.0
    with pytest.raises(ValueError):
        extract_envelopes(GrayImage(px), 128.0, baseline_row=0,
                          columns_per_second=100.0)


def test_extract_envelopes_nonnegative_upper_nonpositive_lower():
    rng = np.random.default_rng(1)
    px = (rng.random((30, 50)) > 0.8) * 255.0
    pair = extract_envelopes(GrayImage(px), 128.0, 15, 100.0)
    assert np.all(pair.upper.samples >= 0)
    assert np.all(pair.lower.samples <= 0)


def test_detect_baseline_row():
    px = np.zeros((12, 20))
    px[7, :] = 255.0
    px[3, :5] = 255.0
    assert detect_baseline_row(GrayImage(px), 128.0) == 7


def test_preprocess_envelopes_preserves_shape():
    fs_img = 100.0
    t = np.arange(800) / fs_img
    u = 30.0 + 20.0 * np.sin(2 * np.pi * 2.3 * t)
    l = -25.0 - 10.0 * np.sin(2 * np.pi * 2.3 * t + 0.4)
    pair = EnvelopePair(upper=TimeSeries(u, fs_img),
                        lower=TimeSeries(l, fs_img))
    out = preprocess_envelopes(pair)
    assert out.fs == TARGET_FS
    assert len(out.upper) == int(round(800 / fs_img * TARGET_FS))
    assert abs(np.mean(out.upper.samples)) < 1e-9
    assert abs(np.mean(out.lower.samples)) < 1e-9
    # in-band sinusoid survives: compare against the centered resampled truth
    truth = np.interp(np.arange(len(out.upper)) / TARGET_FS, t, u)
    truth -= truth.mean()
    r = np.corrcoef(out.upper.samples, truth)[0, 1]
    assert r >= 0.99


def test_preprocess_envelopes_constant_input():
    pair = EnvelopePair(upper=TimeSeries(np.full(500, 12.0), 100.0),
                        lower=TimeSeries(np.zeros(500), 100.0))
    out = preprocess_envelopes(pair)
    assert np.allclose(out.upper.samples, 0.0)
    assert np.allclose(out.lower.samples, 0.0)


def test_pca_compress_envelopes_collinear_case():
    # oracle: with lower = -upper the principal axis is (1,-1)/sqrt(2), so
    # the projection equals sqrt(2) * centered upper
    u = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    pair = EnvelopePair(upper=TimeSeries(u, 284.0),
                        lower=TimeSeries(-u, 284.0))
    out = pca_compress_envelopes(pair)
    expected = np.sqrt(2.0) * (u - u.mean())
    assert np.allclose(out.samples, expected)
    with pytest.raises(DegenerateInput):
        pca_compress_envelopes(EnvelopePair(
            upper=TimeSeries(np.full(5, 2.0), 284.0),
            lower=TimeSeries(np.full(5, -3.0), 284.0)))
