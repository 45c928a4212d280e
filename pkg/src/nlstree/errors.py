"""Shared exception types."""


class ValidationError(ValueError):
    """A parameter, configuration value, or input is outside its contract."""


class BudgetExceededError(RuntimeError):
    """An enumeration, sum, or expression grew past its configured cap."""


class TreeParseError(ValidationError):
    """Malformed tree text.  Carries the offending character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position
