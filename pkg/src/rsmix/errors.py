"""Shared exception types."""


class FormatError(ValueError):
    """Malformed or truncated file content; message names the location."""


class ConfigError(ValueError):
    """Invalid pipeline configuration; message names the offending key."""
