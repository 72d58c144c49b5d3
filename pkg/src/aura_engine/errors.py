"""Exception types shared across the engine.

The CLI maps these onto exit codes: input problems (parsing, validation,
configuration) exit with 2, everything else unexpected with 3.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


class InputError(EngineError):
    """A problem with user-supplied data: files, configs, labels."""


class StreamParseError(InputError):
    """Malformed keypoint stream record; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class StreamValidationError(InputError):
    """Structurally valid stream that violates an invariant."""


class ConfigError(InputError):
    """Bad configuration file or parameter value."""


class SequencingError(EngineError):
    """Frames fed to a stateful detector out of stream order."""


class ConstructionError(InputError):
    """A scenario's margin/noise combination cannot guarantee its labels."""
