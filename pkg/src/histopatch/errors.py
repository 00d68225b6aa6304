"""Exception hierarchy shared across the pipeline."""


class HistopatchError(Exception):
    """Base class for all errors raised by this package."""


# --- tiling ---

class WindowExceedsDim(HistopatchError):
    """Sliding window is larger than the image dimension it must fit."""


class ImageSmallerThanWindow(HistopatchError):
    """Image cannot hold a single window; caller must pre-pad explicitly."""


class NonIntegerStride(HistopatchError):
    """window * (1 - overlap) is not a positive integer."""


# --- nn engine ---

class ShapeMismatch(HistopatchError):
    """Tensor shapes do not compose for the requested operation."""


class NonFiniteLoss(HistopatchError):
    """Training loss became NaN/Inf; aborts with diagnostics."""


class BadMagic(HistopatchError):
    """Weight file does not start with the expected magic bytes."""


class UnsupportedVersion(HistopatchError):
    """Weight file version is unknown to this reader."""


class TruncatedFile(HistopatchError):
    """Weight file ended before the declared payload."""


class NameCollision(HistopatchError):
    """Two tensors share a name within one weight store."""


# --- aggregation ---

class EmptyTally(HistopatchError):
    """Majority vote requested over zero patches."""


# --- dataset ---

class UnknownLabel(HistopatchError):
    """Label string does not name one of the four classes."""


class DuplicatePath(HistopatchError):
    """Manifest lists the same image path twice."""


# --- metrics ---

class LengthMismatch(HistopatchError):
    """y_true and y_pred have different lengths."""


class EmptyInput(HistopatchError):
    """Metric computation over zero samples."""
