"""Shared exception hierarchy.

Module-specific failures subclass :class:`BactrexError` in the module that
owns them; only the base classes that cut across modules live here.
"""


class BactrexError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(BactrexError):
    """A configuration file or option set is invalid."""
