import itertools

import numpy as np
import pytest

from pwdrecon.core import MultichannelRecording, Polarity, TimeSeries
from pwdrecon.errors import DegenerateInput, NoPeaksDetected
from pwdrecon.separation import (
    detect_polarity,
    extract_fecg,
    fastica,
    pca_fit,
    pca_remove_top,
)

FS = 284.0


def test_pca_fit_matches_closed_form_2x2():
    # oracle: hand-solved eigensystem of [[2, 1], [1, 2]] -> 3 and 1 with
    # eigenvectors (1, 1)/sqrt(2) and (1, -1)/sqrt(2)
    rng = np.random.default_rng(0)
    root = np.linalg.cholesky(np.array([[2.0, 1.0], [1.0, 2.0]]))
    data = rng.normal(size=(200_000, 2)) @ root.T + np.array([3.0, -1.0])
    m = pca_fit(data)
    assert np.allclose(m.mean, [3.0, -1.0], atol=0.02)
    assert np.allclose(m.eigenvalues, [3.0, 1.0], atol=0.05)
    v = m.components[0]
    assert abs(abs(v @ np.array([1.0, 1.0]) / np.sqrt(2.0)) - 1.0) < 1e-2


def test_pca_eigenvalues_sorted_and_orthonormal():
    rng = np.random.default_rng(1)
    data = rng.normal(size=(500, 4)) * np.array([5.0, 2.0, 1.0, 0.1])
    m = pca_fit(data)
    assert np.all(np.diff(m.eigenvalues) <= 1e-12)
    assert np.allclose(m.components @ m.components.T, np.eye(4), atol=1e-10)
    # round trip
    rec = m.reconstruct(m.transform(data))
    assert np.max(np.abs(rec - data)) < 1e-8


def test_pca_fit_rejects_degenerate():
    with pytest.raises(DegenerateInput):
        pca_fit(np.zeros((50, 3)))
    with pytest.raises(ValueError):
        pca_fit(np.zeros((2, 3)))


def test_pca_remove_top_kills_dominant_direction():
    rng = np.random.default_rng(2)
    strong = rng.normal(size=1000) * 10.0
    weak = rng.normal(size=1000)
    mix = np.stack([strong + 0.1 * weak, strong - 0.1 * weak,
                    strong + 0.05 * weak], axis=1)
    resid = pca_remove_top(mix, k=1)
    assert resid.shape == mix.shape
    assert np.max(np.abs(resid.mean(axis=0))) < 1e-9  # centered
    # dominant shared component should be essentially gone
    r = np.corrcoef(resid[:, 0], strong)[0, 1]
    assert abs(r) < 0.05
    with pytest.raises(ValueError):
        pca_remove_top(mix, k=3)


def _best_abs_corr_assignment(sources, recovered):
    """Oracle: exhaustive permutation search over component matching."""
    k = sources.shape[1]
    best = -1.0
    for perm in itertools.permutations(range(k)):
        rs = [abs(np.corrcoef(sources[:, i], recovered[:, perm[i]])[0, 1])
              for i in range(k)]
        best = max(best, min(rs))
    return best


def test_fastica_recovers_independent_sources():
    rng = np.random.default_rng(7)
    n = 6000
    t = np.arange(n) / FS
    s = np.stack([
        np.sign(np.sin(2 * np.pi * 1.3 * t)),
        rng.uniform(-1, 1, size=n),
        np.sin(2 * np.pi * 0.37 * t + 0.5) ** 3,
    ], axis=1)
    A = np.array([[1.0, 0.6, -0.4], [0.5, -1.2, 0.3], [-0.7, 0.2, 1.1]])
    x = s @ A.T
    model = fastica(x, n_components=3, seed=0)
    rec = model.transform(x)
    assert _best_abs_corr_assignment(s, rec) >= 0.95
    assert model.converged
    # unmixing rows are unit-norm
    assert np.allclose(np.linalg.norm(model.unmixing, axis=1), 1.0)


def test_fastica_deterministic_given_seed():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2000, 3)) @ rng.normal(size=(3, 3))
    a = fastica(x, n_components=3, seed=11)
    b = fastica(x, n_components=3, seed=11)
    assert np.array_equal(a.unmixing, b.unmixing)
    assert np.array_equal(a.whitening, b.whitening)


def test_fastica_rejects_rank_deficient():
    rng = np.random.default_rng(4)
    one = rng.normal(size=1000)
    x = np.stack([one, 2 * one, -one], axis=1)
    with pytest.raises(DegenerateInput):
        fastica(x, n_components=3, seed=0)


def _beat_train(t, r_times, polarity=1):
    x = np.zeros_like(t)
    for c in r_times:
        x += polarity * np.exp(-0.5 * ((t - c) / 0.012) ** 2)
    return x


def test_extract_fecg_recovers_fetal_source():
    rng = np.random.default_rng(5)
    dur, fs = 16.0, FS
    t = np.arange(int(dur * fs)) / fs
    fetal = 0.1 * _beat_train(t, np.arange(0.3, dur, 60.0 / 140))
    maternal = _beat_train(t, np.arange(0.1, dur, 60.0 / 75))
    mat_w = np.array([1.0, 0.9, 1.1])
    fet_w = np.array([0.8, -1.2, 0.5])
    mix = (np.outer(maternal, mat_w) + np.outer(fetal, fet_w)
           + 0.005 * rng.normal(size=(t.size, 3)))
    rec = MultichannelRecording(
        channels=tuple(TimeSeries(mix[:, i], fs) for i in range(3)),
        source_fs=fs)
    out = extract_fecg(rec, seed=0)
    r = abs(np.corrcoef(out.samples, fetal)[0, 1])
    assert r >= 0.8
    assert out.fs == fs


def test_extract_fecg_requires_three_channels():
    ts = TimeSeries(np.random.default_rng(0).normal(size=600), FS)
    rec = MultichannelRecording(channels=(ts, ts), source_fs=FS)
    with pytest.raises(ValueError):
        extract_fecg(rec, seed=0)


def test_detect_polarity():
    t = np.arange(int(4 * FS)) / FS
    pos = _beat_train(t, np.arange(0.3, 4.0, 0.45), polarity=1)
    neg = _beat_train(t, np.arange(0.3, 4.0, 0.45), polarity=-1)
    noise = 0.02 * np.random.default_rng(6).normal(size=t.size)
    assert detect_polarity(TimeSeries(pos + noise, FS)) is Polarity.POSITIVE
    assert detect_polarity(TimeSeries(neg + noise, FS)) is Polarity.NEGATIVE
    with pytest.raises(NoPeaksDetected):
        detect_polarity(TimeSeries(np.zeros(600), FS))


def test_detect_polarity_antisymmetric():
    rng = np.random.default_rng(8)
    t = np.arange(int(3 * FS)) / FS
    x = _beat_train(t, np.arange(0.2, 3.0, 0.5)) + 0.05 * rng.normal(
        size=t.size)
    a = detect_polarity(TimeSeries(x, FS))
    b = detect_polarity(TimeSeries(-x, FS))
    assert {a, b} == {Polarity.POSITIVE, Polarity.NEGATIVE}
