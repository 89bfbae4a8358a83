class SyllobenchError(Exception):
    """Base class for every error raised by syllobench."""


class ParseError(SyllobenchError, ValueError):
    pass


class ConfigurationError(SyllobenchError):
    pass


class TableValidationError(SyllobenchError):
    pass


class MissingDataError(SyllobenchError):
    pass


class DatasetError(SyllobenchError):
    """
    Raised when a dataset file fails validation.

    :param message: What is wrong with the row.
    :param row: 1-based line number in the file (the header is row 1), or None for file-level problems.
    """

    def __init__(self, message: str, row: int or None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ProtocolViolation(SyllobenchError):
    def __init__(self, model_id: str, subject_id: str, seq: int, value):
        self.model_id = model_id
        self.subject_id = subject_id
        self.seq = seq
        super().__init__(
            f"Model \"{model_id}\" returned {value!r} for subject \"{subject_id}\" trial {seq}, "
            f"expected one of the nine response options"
        )
