"""Exception types raised across the pipeline.

Every failure mode a caller may want to handle gets its own class so the
service layer can map them to stable wire-level error codes.
"""


class SerkitError(Exception):
    """Base class for all package errors."""

    #: stable machine-readable identifier, overridden per subclass
    code = "error"


# audio_io

class MalformedContainer(SerkitError):
    """Payload is not a well-formed RIFF/WAVE container."""

    code = "malformed_wav"


class UnsupportedEncoding(SerkitError):
    """WAV codec other than 16-bit PCM or 32-bit IEEE float."""

    code = "unsupported_encoding"


class EmptyAudio(SerkitError):
    """Decoded container holds zero sample frames."""

    code = "empty_audio"


# dsp

class DomainError(SerkitError):
    """Argument outside a function's mathematical domain."""

    code = "domain_error"


class InsufficientSamples(SerkitError):
    """Signal too short for the requested transform."""

    code = "insufficient_samples"


class DegenerateFilter(SerkitError):
    """Mel filterbank row collapsed to all zeros on the FFT bin grid."""

    code = "degenerate_filter"


class RateMismatch(SerkitError):
    """Clip sample rate disagrees with the configured feature rate."""

    code = "rate_mismatch"


# dataset

class MalformedName(SerkitError):
    """Filename does not follow the 7-field RAVDESS convention."""

    code = "malformed_name"


class CodeOutOfRange(SerkitError):
    """A RAVDESS filename field holds an out-of-range code."""

    code = "code_out_of_range"


class EmptyDataset(SerkitError):
    """No usable audio files under the dataset root."""

    code = "empty_dataset"


class InsufficientData(SerkitError):
    """Too few examples to carve out the requested test set."""

    code = "insufficient_data"


# tensor_nn / optim

class ShapeMismatch(SerkitError):
    """Tensor shapes incompatible with the requested operation."""

    code = "shape_mismatch"


class DegenerateBatch(SerkitError):
    """Batch statistics undefined (fewer than 2 values per channel)."""

    code = "degenerate_batch"


class InvalidTarget(SerkitError):
    """Class index outside [0, n_classes)."""

    code = "invalid_target"


class NonFiniteLoss(SerkitError):
    """Training loss became NaN/Inf; carries the epoch and batch."""

    code = "non_finite_loss"

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


# model serialization

class VersionMismatch(SerkitError):
    """Model file format version not supported by this build."""

    code = "version_mismatch"


class ChecksumFailure(SerkitError):
    """Model payload CRC does not match the stored checksum."""

    code = "checksum_failure"


class TruncatedFile(SerkitError):
    """Model file ends before the declared payload is complete."""

    code = "truncated_file"
