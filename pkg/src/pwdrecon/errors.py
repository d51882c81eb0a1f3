"""Exception hierarchy shared by all pwdrecon modules."""


class PwdReconError(Exception):
    """Base class for all errors raised by this package."""


# --- dsp ---

class InvalidBand(PwdReconError):
    """Band edges do not satisfy 0 < low < high < fs/2."""


class NumericalInstability(PwdReconError):
    """A designed filter has a pole on or outside the unit circle."""


class SignalTooShort(PwdReconError):
    """Signal too short for the requested filtering operation."""


class ZeroVariance(PwdReconError):
    """Operation requires a non-constant signal."""


class SignalShorterThanWindow(PwdReconError):
    """Record shorter than one window length."""


# --- separation ---

class DegenerateInput(PwdReconError):
    """Input data has no usable variance structure."""


class NonConvergence(PwdReconError):
    """Iterative solver hit its iteration cap before converging."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class NoFetalComponent(PwdReconError):
    """No independent component has a beat rate in the fetal band."""


class NoPeaksDetected(PwdReconError):
    """Polarity detection found no QRS-like peaks."""


# --- pwd envelope ---

class ConstantImage(PwdReconError):
    """Image has a single intensity value; thresholding undefined."""


# --- nn engine ---

class ShapeMismatch(PwdReconError):
    """Tensor shapes inconsistent with the operation's contract."""


class OddLength(PwdReconError):
    """maxpool2 requires an even temporal length."""


class EmptyDataset(PwdReconError):
    """Training requires at least one sample."""


# --- harness / eval ---

class FileMissing(PwdReconError):
    """A file referenced by a manifest does not exist."""


class SizeMismatch(PwdReconError):
    """File size inconsistent with the manifest."""


class BadMagic(PwdReconError):
    """Unsupported file magic (only binary P5 PGM accepted)."""


class TooFewWindows(PwdReconError):
    """A record must contribute at least 2 windows to be split."""


class NoWindowsAfterFilter(PwdReconError):
    """Config filters excluded every window; cell reported as empty."""


class AllWindowsExcluded(PwdReconError):
    """Every window pair had zero variance; no correlation defined."""
