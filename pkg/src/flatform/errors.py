"""Exception types shared across the package."""


class FlatformError(Exception):
    """Base class for library errors."""


class PreconditionError(FlatformError):
    """An operation was called on input violating its stated precondition."""


class InvariantViolation(FlatformError):
    """A proven identity failed on a concrete instance (bug detector)."""


class StructureError(FlatformError):
    """The structure pipeline could not proceed.

    ``code`` is one of ``not_flat``, ``incompatible``, ``inconsistent_J``.
    """

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class RetryCapExceeded(FlatformError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InstanceFormatError(FlatformError):
    """Malformed instance file; ``where`` names the offending field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
