class WeakTiesError(Exception):
    """Base class for library errors."""


class DataError(WeakTiesError, ValueError):
    """Input data is unreadable, malformed, or inconsistent."""


class ConfigError(WeakTiesError, ValueError):
    """Invalid experiment configuration or command-line usage."""
