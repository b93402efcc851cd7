"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2,
DataIntegrityError -> 3, NumericalError -> 4.
"""


class SomganError(Exception):
    """Base class for all package errors."""


class ParameterError(SomganError, ValueError):
    """An argument violates a documented precondition."""


class BoundsError(ParameterError):
    """A region (signal support, ROI) does not fit inside the field."""


class ConfigError(SomganError):
    """A configuration file or option set is invalid or inconsistent."""


class ModeError(ConfigError):
    """An operation was requested on a model of the wrong kind."""


class ScheduleError(SomganError):
    """A progressive-growing schedule was violated (e.g. growing past the end)."""


class DataIntegrityError(SomganError):
    """On-disk data does not match its manifest (size, hash, version)."""


class NumericalError(SomganError):
    """A numerical routine failed beyond its documented tolerance."""
