"""Exception hierarchy for twinfalsify"""

from typing import Any, Optional


class TwinFalsifyError(Exception):
    """Base class for all twinfalsify errors"""


class ValidationError(TwinFalsifyError, ValueError):
    """Invalid input: malformed files, schema violations, bad parameters"""


class ParseError(ValidationError):
    """A dataset or hypothesis file could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaViolation(ValidationError):
    """A record does not conform to its FeatureSchema"""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)


class DegenerateBinningError(ValidationError):
    """Action binning cannot be fitted (no positive doses, tied quartiles)"""


class PositivityError(ValidationError):
    """A conditioning event has zero probability"""


class ProtocolError(ValidationError):
    """Malformed frame on the external twin protocol"""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class TwinError(TwinFalsifyError, RuntimeError):
    """A twin session failed"""

    def __init__(self, message: str, session_index: Optional[int] = None):
        self.session_index = session_index
        if session_index is not None:
            message = f"session {session_index}: {message}"
        super().__init__(message)


class SessionTimeout(TwinError):
    """An external twin did not answer within the configured timeout"""


class StageError(TwinFalsifyError, RuntimeError):
    """A pipeline stage failed; carries the stage name and partial results"""

    def __init__(self, stage: str, cause: BaseException, partial: Any = None):
        self.stage = stage
        self.cause = cause
        self.partial = partial
        super().__init__(f"stage '{stage}' failed: {cause}")
