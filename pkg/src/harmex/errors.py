"""Exception hierarchy shared by all harmex modules.

Every error carries a short machine-readable ``category`` string that the
CLI emits on stderr, so batch scripts can dispatch on failures without
parsing prose.
"""


class HarmexError(Exception):
    """Base class for all harmex errors."""

    category = "error"

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{message} [{path}]"
        super().__init__(message)


class ConfigError(HarmexError):
    """Invalid or inconsistent configuration / arguments."""

    category = "config"


class LengthMismatchError(ConfigError):
    """Sequence lengths inconsistent beyond the allowed slack."""

    category = "length-mismatch"


class DomainError(HarmexError):
    """Input values outside the mathematical domain of an operation."""

    category = "domain"


class AliasingError(DomainError):
    """A requested frequency is at or above the Nyquist frequency."""

    category = "aliasing-domain"


class FormatError(HarmexError):
    """A file does not conform to the expected on-disk format."""

    category = "format"


class DegenerateReferenceError(DomainError):
    """The reference signal of a relative metric is identically zero."""

    category = "degenerate-reference"


class UndefinedMetricError(DomainError):
    """A metric has an empty support (e.g. no voiced frames)."""

    category = "undefined-metric"
