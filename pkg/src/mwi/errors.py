"""Exception types shared across the package."""


class DatasetFormatError(Exception):
    """Base error for malformed .mwie / .mwic container files."""


class BadMagicError(DatasetFormatError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersionError(DatasetFormatError):
    """File declares a format version this reader does not understand."""


class TruncatedFileError(DatasetFormatError):
    """File ends before the declared payload is complete."""


class LabelIndexError(DatasetFormatError):
    """A record refers to a label index outside the vocabulary."""


class DegenerateVectorError(ValueError):
    """A vector with zero L2 norm where a direction is required."""


class DegenerateClassError(ValueError):
    """A class with no usable examples or a zero mean embedding."""


class DuplicateClassError(ValueError):
    """A class name that already exists on the classifier."""


class DimensionMismatchError(ValueError):
    """Vector length does not match the expected embedding dimension."""


class EmptyTrainingSetError(ValueError):
    """Training was requested with no rows."""


class SoftmaxTargetError(ValueError):
    """A softmax head was given a row without exactly one target label."""


class InsufficientLabelsError(ValueError):
    """Dataset does not contain enough labels for the requested episode."""


class InsufficientExamplesError(ValueError):
    """A label does not have enough example groups for the requested episode."""

    def __init__(self, message: str, label_names: tuple[str, ...] = ()):
        super().__init__(message)
        self.label_names = tuple(label_names)
