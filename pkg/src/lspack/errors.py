"""Exception hierarchy shared by the library and the CLI."""


class LspackError(Exception):
    """Base class for all lspack errors."""


class FormatError(LspackError):
    """Malformed or unsupported input file (CLI exit code 3)."""


class NumericalError(LspackError):
    """Numerical failure: rank-deficient sketch, zero input, domain violation (CLI exit code 4)."""


class MemoryBudgetError(NumericalError):
    """A dense intermediate would exceed the configured memory budget."""
