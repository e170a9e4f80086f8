"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so raising the right class
matters: ConfigError for bad configuration or catalogs, IngestError for
unreadable input files, ComputationError for requests the data cannot
satisfy (empty windows, zero FLOPs, no on-duty intervals, ...).
"""


class FleetCarbonError(Exception):
    """Base class for all package errors."""


class ConfigError(FleetCarbonError):
    """Invalid or missing configuration, catalog, or inventory data."""


class IngestError(FleetCarbonError):
    """Input files that cannot be read or parsed at all."""


class ComputationError(FleetCarbonError):
    """A computation whose preconditions the supplied data does not meet."""
