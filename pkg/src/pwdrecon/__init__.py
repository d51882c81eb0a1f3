"""pwdrecon: pulsed-wave Doppler envelope reconstruction from fetal ECG."""

from .core import (
    EnvelopePair,
    EnvelopeSelection,
    ModelKind,
    MultichannelRecording,
    OutputMode,
    Polarity,
    RecordManifest,
    SampleWindowPair,
    SplitMode,
    TimeSeries,
    WaveConfig,
    duration,
)

__version__ = "0.1.0"

__all__ = [
    "EnvelopePair", "EnvelopeSelection", "ModelKind",
    "MultichannelRecording", "OutputMode", "Polarity", "RecordManifest",
    "SampleWindowPair", "SplitMode", "TimeSeries", "WaveConfig", "duration",
    "__version__",
]
