"""Exception hierarchy.

``ValidationError`` subclasses map to CLI exit status 1; ``OSError`` (and
``DataIOError``) map to exit status 2.
"""


class ValidationError(ValueError):
    """Input or configuration failed a documented precondition."""


class DataIOError(OSError):
    """A file could not be read or written."""


class LabelColumnNotFound(ValidationError):
    pass


class DuplicateColumnName(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class EmptyFeatureSet(ValidationError):
    pass


class LabelError(ValidationError):
    """Labels are not binary, or a single class was given where two are needed."""


class ConfigMismatch(ValidationError):
    """Two batch states were produced under incompatible settings."""


class SchemaViolation(ValidationError):
    """A persisted JSON document does not match its schema."""


class ExternalClassifierError(RuntimeError):
    pass
