"""Exception hierarchy shared across the package.

CLI exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 I/O error.
"""


class CamcloakError(Exception):
    """Base class for all package errors; covers invalid parameters and
    geometry misuse, which the CLI reports as configuration problems."""

    exit_code = 2


class ConfigError(CamcloakError):
    """Invalid configuration file or parameter set."""

    exit_code = 2


class NumericError(CamcloakError):
    """A numerical procedure could not meet its contract."""

    exit_code = 3


class NoRootError(NumericError):
    """A bracketed root solve found no sign change in the admissible range."""


class NonMonotonicBracketError(NumericError):
    """A solve bracket failed its monotonicity pre-check."""


class AccuracyError(NumericError):
    """Requested accuracy is unreachable within the configured iteration cap."""


class DumpFormatError(CamcloakError):
    """Malformed field-dump file (bad magic, version, or truncation)."""

    exit_code = 4
