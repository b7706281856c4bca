"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Bad parameters, schema declarations, or run configuration."""


class DataError(ValueError):
    """Malformed input data or serialized artifacts."""


class QueryParseError(ConfigError):
    """Query text that does not conform to the mini-language."""
