"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class CheckpointError(ValueError):
    """An agent checkpoint file is missing fields or inconsistent."""
