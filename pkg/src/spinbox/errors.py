"""Exception hierarchy shared across the package.

The command line layer maps these onto structured exit codes, so new
error types should subclass one of the three categories below.
"""


class SpinboxError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(SpinboxError):
    """Invalid or unknown configuration input (exit code 2)."""


class DataFormatError(SpinboxError):
    """Malformed file content encountered while reading (exit code 3)."""


class NumericsError(SpinboxError, ValueError):
    """A numerical routine cannot produce a meaningful result (exit code 4)."""


class TruncationError(NumericsError):
    """A requested series truncation is too short for the target accuracy."""


class ZeroMassError(NumericsError):
    """An image carries no positive weight, moments are undefined."""


class DegenerateOrientationError(NumericsError):
    """Moment tensor eigenvalues coincide, no principal axis exists."""


class DegenerateFitError(NumericsError):
    """A least squares fit returned the all-zero solution."""
