"""Exception hierarchy shared by the library and the command line."""


class SclregError(Exception):
    """Base class for all package errors."""


class ConfigError(SclregError, ValueError):
    """Malformed or schema-violating experiment configuration (CLI exit code 2)."""


class ComputationError(SclregError, RuntimeError):
    """A numerical routine could not produce a meaningful result (CLI exit code 1)."""
