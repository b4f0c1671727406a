"""Exception types shared across the package."""


class SftlabError(Exception):
    """Base class for all package errors."""


class DeclarationError(SftlabError):
    """Invalid variable declaration (duplicate id, missing partner, bad multiplicity)."""


class TableMismatchError(SftlabError):
    """Two series over different variable tables were combined."""


class ValidationError(SftlabError):
    """An input object violates an invariant.

    ``path`` points at the offending field, e.g. ``"entries[3].value"``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MissingPrimaryError(SftlabError):
    """Reconstruction needed a primary correlator the model does not provide."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"missing primary correlator {key}")


class LabelMismatchError(SftlabError):
    """Count data was checked against an identity for a different section choice."""
