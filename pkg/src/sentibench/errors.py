"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class SentibenchError(Exception):
    """Base class. The CLI maps it to exit code 2 unless a subclass says otherwise."""

    exit_code = 2


class SchemaError(SentibenchError, ValueError):
    """A file does not have the columns or layout we expect."""


class PreconditionError(SentibenchError, ValueError):
    """An operation was called on data that does not satisfy its contract."""


class ParseError(SentibenchError, ValueError):
    """A persisted artifact (model, vocabulary, embeddings) could not be parsed."""


class DomainError(SentibenchError, ValueError):
    """Evaluation-domain problem, e.g. a split with a single class."""

    exit_code = 1


class FeatureSpaceMismatch(SentibenchError, ValueError):
    """Vectors were produced by a different vocabulary or embedding table than the model."""
