"""Exception hierarchy shared by the mining modules and the CLI."""


class HormError(Exception):
    """Base class for all errors raised by this package."""


class TaxonomyError(HormError, ValueError):
    """A taxonomy file or tree construction problem."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnknownItemError(HormError, KeyError):
    """An item code or label that does not resolve in the taxonomy."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown item"


class ConfigError(HormError, ValueError):
    """Invalid thresholds, interest classes or other user configuration."""


class DataError(HormError, ValueError):
    """Malformed transaction or event input."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ConstraintSyntaxError(HormError, ValueError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class IncompleteTableError(HormError, LookupError):
    """A support table is missing a subset needed for confidence."""


class SnapshotError(HormError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotTruncatedError(SnapshotError):
    pass


class SnapshotChecksumError(SnapshotError):
    pass
