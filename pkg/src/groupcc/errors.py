"""Exception types shared across the package."""


class GroupCcError(Exception):
    """Base class for all groupcc errors."""


class ValidationError(GroupCcError, ValueError):
    """An argument violates an operation's contract."""


class FeasibilityError(GroupCcError, ValueError):
    """A decision vector lies outside the feasible box."""


class StructureError(GroupCcError, ValueError):
    """A problem structure specification is inconsistent."""


class GroundTruthError(GroupCcError, ValueError):
    """Ground-truth interaction data was requested but is unavailable."""


class GenerationError(GroupCcError, ValueError):
    """Random instance generation could not satisfy its constraints."""


class ConfigError(GroupCcError, ValueError):
    """An experiment or CLI configuration is invalid."""
