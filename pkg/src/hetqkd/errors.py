class DomainError(ValueError):
    """A parameter lies outside the region where a formula or attack is defined."""


class DimensionError(DomainError):
    pass


class ConditioningError(DomainError):
    """The conditioning block of a covariance matrix is singular."""


class UnrealizableAttackError(DomainError):
    """An attack cannot be tuned to reproduce the requested channel."""
