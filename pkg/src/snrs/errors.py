"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1 (argparse
level), `DataError`/`ModelFormatError` exit 2, `TrainingDiverged`
exit 3.
"""


class SnrsError(Exception):
    """Base class for all package errors."""


class ShapeError(SnrsError):
    """An array dimension disagrees with an operation's contract."""


class DataError(SnrsError):
    """A dataset file or manifest is missing, malformed, or inconsistent."""


class ModelFormatError(SnrsError):
    """Base class for model-file problems; subclasses are distinct."""


class BadMagicError(ModelFormatError):
    """File does not start with the model magic bytes."""


class UnsupportedVersionError(ModelFormatError):
    """Model format version is not supported by this code."""


class TruncatedFileError(ModelFormatError):
    """File ended before the declared payload was complete."""


class ChecksumError(ModelFormatError):
    """Trailing CRC32 does not match the file contents."""


class ModelShapeError(ModelFormatError):
    """Stored masks/weights disagree with the embedded configuration."""


class MaskInvariantError(ModelFormatError):
    """A masked weight slot holds a nonzero value."""


class TrainingDiverged(SnrsError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}"
        )
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
