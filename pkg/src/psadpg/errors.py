"""Exception types shared across the package."""


class DimensionError(ValueError):
    """A matrix or vector has a shape the operation cannot accept."""


class StateError(RuntimeError):
    """An operation was called in an order its state machine forbids."""


class ConfigError(ValueError):
    """A run configuration is malformed or names an unknown key."""


class TrainingDiverged(RuntimeError):
    """A loss or parameter became non-finite during training."""
