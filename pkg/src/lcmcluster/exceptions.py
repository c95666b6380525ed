"""Exception types raised by lcmcluster."""


class EmptyClassError(ValueError):
    """Raised when a class has no members and its item parameters are undefined."""

    def __init__(self, cls, message=None):
        self.cls = int(cls)
        super().__init__(message or f"class {self.cls} has no members")


class ConvergenceError(RuntimeError):
    """Raised when an iterative decomposition misses its residual tolerance.

    The achieved relative residual is stored on ``residual``.
    """

    def __init__(self, message, residual):
        self.residual = float(residual)
        super().__init__(f"{message} (residual={self.residual:.3e})")


class ParseError(ValueError):
    """Malformed cell in a response CSV. ``row`` and ``col`` are 1-based."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" at row {row}" + (f", column {col}" if col is not None else "")
        super().__init__(message + where)


class FormatError(ValueError):
    """Structurally invalid input file (empty, ragged, unusable rows)."""


class BenchConfigError(ValueError):
    """Invalid benchmark configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
