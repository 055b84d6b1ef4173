"""Exception types shared across the toolkit."""


class OsrError(ValueError):
    """Base class for all toolkit errors; the CLI maps these to exit code 1."""


class ParseError(OsrError):
    """Malformed input file; carries a line number when one is known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
