"""Exception hierarchy shared by all modules."""


class MLCleanError(Exception):
    """Base class for all library errors."""


class SchemaError(MLCleanError):
    """A column required by the schema is missing or misconfigured."""


class ValidationError(MLCleanError):
    """A data value violates the schema (bad label, non-numeric cell, ...)."""


class ParameterError(MLCleanError):
    """An operation was called with out-of-range or inconsistent parameters."""


class DegenerateGroupError(MLCleanError):
    """A sensitive group has zero total weight, so group ratios are undefined."""


class InfeasibleStrategyError(MLCleanError):
    """The requested reweighing strategy cannot equalize the group ratios."""


class StageError(MLCleanError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


class ConfigError(MLCleanError):
    """The text config file is malformed or contains unknown keys."""
