"""Exception types raised by the simulator."""


class ParameterError(ValueError):
    """An operation was called with arguments outside its domain."""


class ConfigError(ValueError):
    """A run or experiment configuration is invalid.

    ``keys`` lists the offending configuration keys, when known.
    """

    def __init__(self, message: str, keys: list[str] | None = None, line: int | None = None):
        super().__init__(message)
        self.keys = list(keys or [])
        self.line = line
