from typing import Optional


class MotifSketchError(ValueError):
    """Base class for every error raised by the sketch services."""


class PatternError(MotifSketchError):
    pass


class StreamFormatError(MotifSketchError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class StreamConsistencyError(MotifSketchError):
    pass


class GenerationError(MotifSketchError):
    pass


class GroupSpecError(MotifSketchError):
    pass


class SketchConfigError(MotifSketchError):
    pass


class PlanError(MotifSketchError):
    pass


class OracleLimitError(MotifSketchError):
    pass
