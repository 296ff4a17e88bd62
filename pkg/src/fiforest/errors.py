"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies instead of bare ValueError where the failure is
attributable to user-supplied configuration or data files.
"""


class FifError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FifError):
    """Invalid configuration: bad field values, unknown keys, impossible sizes."""


class DataError(FifError):
    """Invalid input data: unparseable files, ragged rows, grid mismatches."""
