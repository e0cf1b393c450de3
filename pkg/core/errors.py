"""
Exception types shared by the toolkit.
"""


class ToolkitError(Exception):
    """Base class for every error raised on purpose by the toolkit."""


class DataError(ToolkitError, ValueError):
    """Input data is malformed or inconsistent (bad cell, ragged rows, length mismatch)."""


class StageError(ToolkitError):
    """A pipeline stage failed; keeps the stage name and the underlying cause."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
