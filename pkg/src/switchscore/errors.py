"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/parse problems exit 1,
undefined metrics exit 2, training failures exit 3.
"""


class SwitchScoreError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SwitchScoreError):
    """An argument violates an operation's preconditions."""


class UndefinedMetricError(SwitchScoreError):
    """A rate was requested but its denominator is zero."""


class TranscriptParseError(SwitchScoreError):
    """A transcript or vocabulary file could not be parsed.

    Carries the offending path and, when known, the 1-based line number.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class TrainingFailureError(SwitchScoreError):
    """Training produced a non-finite loss. Carries the failing epoch."""

    def __init__(self, message: str, epoch: int):
        self.epoch = epoch
        super().__init__(f"{message} (epoch {epoch})")
