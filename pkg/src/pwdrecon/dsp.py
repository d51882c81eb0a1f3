"""Filtering, resampling, normalization and windowing primitives.

Applied to both the extracted fECG stream and the PwD envelope stream.
Filter design and zero-phase application are delegated to scipy.signal
behind the IIRFilter contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .core import TARGET_FS, SampleWindowPair, TimeSeries
from .errors import (
    InvalidBand,
    NumericalInstability,
    SignalShorterThanWindow,
    SignalTooShort,
    ZeroVariance,
)

WINDOW_SECONDS = (0.25, 0.5, 0.75, 1.0, 2.0)


@dataclass(frozen=True)
class IIRFilter:
    """Stable biquad cascade plus its design metadata.

    sos: (n_sections, 6) array of [b0, b1, b2, 1, a1, a2] rows.
    """

    sos: np.ndarray
    kind: str  # "bessel" | "butterworth"
    low_hz: float
    high_hz: float
    order: int
    design_fs: float

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(sec[3:]) for sec in self.sos])

    def impulse_response(self, n: int = 8192) -> np.ndarray:
        x = np.zeros(n)
        x[0] = 1.0
        return sps.sosfilt(self.sos, x)


def design_bandpass(kind: str, low_hz: float, high_hz: float,
                    order: int, fs: float) -> IIRFilter:
    """Design a bandpass biquad cascade from an analog prototype.

    `order` is the lowpass prototype order (even, >= 2); the bandpass
    transform doubles it. Discretization is bilinear with band-edge
    prewarping. Bessel prototypes are magnitude-normalized (-3 dB at the
    band edges).
    """
    if not (0 < low_hz < high_hz < fs / 2):
        raise InvalidBand(
            f"need 0 < low ({low_hz}) < high ({high_hz}) < fs/2 ({fs / 2})")
    if order < 2 or order % 2 != 0:
        raise ValueError("order must be even and >= 2")

    kind = kind.lower()
    if kind in ("butterworth", "butter"):
        sos = sps.butter(order, [low_hz, high_hz], btype="bandpass",
                         output="sos", fs=fs)
        kind = "butterworth"
    elif kind == "bessel":
        sos = sps.bessel(order, [low_hz, high_hz], btype="bandpass",
                         norm="mag", output="sos", fs=fs)
    else:
        raise ValueError(f"unknown filter kind: {kind!r}")

    f = IIRFilter(sos=sos, kind=kind, low_hz=low_hz, high_hz=high_hz,
                  order=order, design_fs=fs)
    pole_mag = np.abs(f.poles())
    if np.any(pole_mag >= 1.0):
        raise NumericalInstability(
            f"designed pole magnitude {pole_mag.max():.6f} >= 1")
    return f


def filtfilt(f: IIRFilter, x: TimeSeries) -> TimeSeries:
    """Zero-phase forward-backward application of `f`.

    Output length equals input length. The signal is reflect-padded
    before the forward pass to suppress edge transients.
    """
    digital_order = 2 * f.order  # bandpass doubles the prototype order
    if len(x) <= 3 * digital_order:
        raise SignalTooShort(
            f"need more than {3 * digital_order} samples, got {len(x)}")
    # long even-reflection padding tames the near-DC pole's transient
    padlen = min(len(x) - 1, int(10 * x.fs))
    y = sps.sosfiltfilt(f.sos, x.samples, padtype="even", padlen=padlen)
    return TimeSeries(y, x.fs)


def resample_linear(x: TimeSeries, fs_out: float) -> TimeSeries:
    """Resample by linear interpolation at exact output timestamps."""
    if not fs_out > 0:
        raise ValueError("fs_out must be > 0")
    if fs_out == x.fs:
        return TimeSeries(x.samples.copy(), x.fs)
    n_out = int(round(len(x) * fs_out / x.fs))
    if n_out < 1:
        raise ValueError("resampled signal would be empty")
    t_out = np.arange(n_out) / fs_out
    t_in = np.arange(len(x)) / x.fs
    y = np.interp(t_out, t_in, x.samples)
    return TimeSeries(y, fs_out)


def zscore(x: TimeSeries) -> TimeSeries:
    """Normalize to zero mean, unit standard deviation."""
    if len(x) < 2:
        raise ValueError("zscore needs at least 2 samples")
    sd = float(np.std(x.samples))
    if sd == 0.0:
        raise ZeroVariance("constant signal has no z-score")
    return TimeSeries((x.samples - np.mean(x.samples)) / sd, x.fs)


def mean_center(x: TimeSeries) -> TimeSeries:
    """Subtract the mean; removes the DC component, preserves shape."""
    return TimeSeries(x.samples - np.mean(x.samples), x.fs)


def window_length(window_s: float, fs: float = TARGET_FS) -> int:
    return int(round(window_s * fs))


def segment(x: TimeSeries, y_channels: list[TimeSeries], window_s: float,
            record_id: str = "") -> list[SampleWindowPair]:
    """Cut aligned streams into consecutive non-overlapping windows.

    The trailing remainder shorter than one window is discarded.
    """
    if window_s not in WINDOW_SECONDS:
        raise ValueError(f"window_s must be one of {WINDOW_SECONDS}")
    for y in y_channels:
        if y.fs != x.fs or len(y) != len(x):
            raise ValueError("x and y_channels must share fs and length")
    L = window_length(window_s, x.fs)
    n_win = len(x) // L
    if n_win == 0:
        raise SignalShorterThanWindow(
            f"record of {len(x)} samples shorter than window of {L}")
    out = []
    for w in range(n_win):
        lo = w * L
        y = np.stack([ych.samples[lo:lo + L] for ych in y_channels])
        out.append(SampleWindowPair(
            x=x.samples[lo:lo + L], y=y, t_start=lo / x.fs,
            record_id=record_id))
    return out
