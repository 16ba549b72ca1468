"""Exception hierarchy shared across the package."""


class EdnigError(Exception):
    pass


class ContractError(EdnigError, ValueError):
    """An input violated an operation's precondition."""


class DatasetLayoutError(EdnigError):
    pass


class PairingError(DatasetLayoutError):
    pass


class ArchiveError(EdnigError):
    pass


class ChecksumError(ArchiveError):
    pass


class IncompatibleFormatError(ArchiveError):
    pass


class NumericError(EdnigError, FloatingPointError):
    pass


class ModelFileError(EdnigError, FileNotFoundError):
    """A required parameter/weights file is missing or unreadable."""
