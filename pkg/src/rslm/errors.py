"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration (bad ranges, inconsistent variants, ...)."""


class InputError(ValueError):
    """Runtime input violates an operation's preconditions (shape/dim mismatch)."""


class FormatError(ValueError):
    """A serialized artifact is malformed; message names the offending field."""


class IntegrityError(RuntimeError):
    """A persisted artifact does not match its recorded content hash."""


class TrainingDiverged(RuntimeError):
    """Non-finite loss during training; carries a diagnostic record."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
