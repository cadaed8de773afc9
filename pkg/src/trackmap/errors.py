"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


class ParseError(ValueError):
    """A malformed line in a graph or track file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        where = ", ".join(parts)
        super().__init__(f"{where}: {message}" if where else message)


class DuplicateIdError(ValueError):
    """Two records in one file share an id."""

    def __init__(self, kind, ident, path=None, line=None):
        self.kind = kind
        self.ident = ident
        self.path = path
        self.line = line
        loc = f" ({path}:{line})" if path is not None else ""
        super().__init__(f"duplicate {kind} id {ident}{loc}")
