"""Exception types raised across the package."""


class GroupSyncError(Exception):
    """Base class for all package errors."""


class InvalidOrderError(GroupSyncError, ValueError):
    pass


class CapacityError(GroupSyncError, ValueError):
    """A construction or search would exceed its size budget."""


class InvalidSizeError(GroupSyncError, ValueError):
    pass


class ShapeError(GroupSyncError, ValueError):
    """Labeling length does not match the graph."""


class DomainError(GroupSyncError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class DegenerateBoundError(DomainError):
    """Bound is vacuous at the requested parameters (e.g. at the critical flip probability)."""


class UnsupportedGraphError(GroupSyncError, ValueError):
    pass


class ConfigError(GroupSyncError, ValueError):
    pass
