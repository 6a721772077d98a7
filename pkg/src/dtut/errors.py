"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments or inconsistent configuration."""


class GroupMismatchError(UsageError):
    """An element does not belong to the group it was handed to."""


class OutOfRangeError(LookupError):
    """A lookup fell outside a precomputed table."""

    def __init__(self, message, required_radius=None):
        super().__init__(message)
        self.required_radius = required_radius


class ResourceError(RuntimeError):
    """A configured size cap would be exceeded."""

    def __init__(self, message, estimate=None, cap=None):
        super().__init__(message)
        self.estimate = estimate
        self.cap = cap


class StageError(RuntimeError):
    """A cascade stage violated a precondition of the saturated union."""

    def __init__(self, message, stage=None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness
