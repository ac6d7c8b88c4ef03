"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument violates an operation's domain (range, shape, grid)."""


class NotFoundError(LookupError):
    """A requested key (beam, rotation, active count) is absent."""


class ParseError(ValueError):
    """A file does not match its documented schema; message names the spot."""


class LobeTruncatedError(ValueError):
    """The half-power crossing is missing on at least one side of the lobe."""


class FitDivergenceError(RuntimeError):
    """Nonlinear fit did not converge; carries the last iterate."""

    def __init__(self, message, params=None, residual_norm=None, iterations=None):
        super().__init__(message)
        self.params = params
        self.residual_norm = residual_norm
        self.iterations = iterations


class ModelFormatError(ValueError):
    """A model file is corrupted or has an unsupported format version."""


class ConfigError(ValueError):
    """A campaign configuration file is missing, malformed, or inconsistent."""
