"""Exception types shared across the package."""


class InputError(ValueError):
    """Rejected input: wrong shape, non-finite values, bad ranges."""


class DegenerateDataError(InputError):
    """Data that cannot support the requested estimate (e.g. all p-values equal)."""


class ConfigError(ValueError):
    """Invalid scenario or run configuration; message names the offending field."""
