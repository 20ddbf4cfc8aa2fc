"""Exception hierarchy shared across the package.

Format-level problems get distinct classes so callers (and the CLI exit-code
mapping) can tell a corrupt file from a data inconsistency.
"""


class VizsigError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(VizsigError):
    """A file does not conform to one of the on-disk formats."""


class MalformedHeaderError(FormatError):
    """Binary container header is missing, wrong, or self-inconsistent."""


class TruncatedPayloadError(FormatError):
    """File ends before the payload or footer declared by its header."""


class DuplicateIdError(FormatError):
    """An identifier that must be unique appears more than once."""


class NonFiniteValueError(FormatError):
    """A numeric payload contains NaN or infinity."""


class MetadataError(VizsigError):
    """A metadata or edge line cannot be parsed; message names the line."""


class SyntheticSpecError(VizsigError):
    """A synthetic-corpus specification violates its constraints."""


class TrainingDivergedError(VizsigError):
    """Classifier training produced a non-finite loss."""


class PipelineStageError(VizsigError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
