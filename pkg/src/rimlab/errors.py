"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, NumericError -> 4.
"""


class RimlabError(Exception):
    """Base class for all package errors."""


class ConfigError(RimlabError):
    """Invalid configuration: bad parameter values, unknown config keys,
    COLA violations, CFAR windows larger than the signal."""


class DataError(RimlabError):
    """Invalid or degenerate data: malformed files, empty datasets,
    all-zero spectrograms, shape mismatches, missing references."""


class ShapeMismatchError(DataError):
    """Operands with incompatible shapes."""


class FileFormatError(DataError):
    """Corrupt or unrecognized dataset/checkpoint file."""


class NumericError(RimlabError):
    """Numerical failure (NaN/Inf encountered during training)."""
