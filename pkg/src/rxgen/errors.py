"""Exception types shared across the toolkit."""


class RxgenError(Exception):
    """Base class for all toolkit errors."""


class MalformedRowError(RxgenError):
    """A corpus file row is missing a required field or cannot be parsed."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class CapacityError(RxgenError):
    """A requested size exceeds what the component can provide."""


class CorpusSizeError(RxgenError):
    """The corpus is too small for the requested operation."""


class AnnotationError(RxgenError):
    """Entity spans violate the annotated-record invariants."""


class ConfigError(RxgenError):
    """A configuration value violates its invariants."""


class InputError(RxgenError):
    """An operation received inputs outside its contract."""


class TrainingError(RxgenError):
    """Scorer training could not proceed."""


class DivergenceError(TrainingError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class UntrainedScorerError(RxgenError):
    """Inference was requested from a scorer that was never trained."""


class UnsupportedOperationError(RxgenError):
    """The scorer kind does not support the requested operation."""


class FormatError(RxgenError):
    """A serialized file is corrupt, truncated, or has the wrong version."""


class KindMismatchError(FormatError):
    """A scorer file holds a different scorer kind than expected."""


class SearchExhaustedError(RxgenError):
    """The decoder ran out of step budget before completing any hypothesis."""

    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats
