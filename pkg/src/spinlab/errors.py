"""Exception types shared across the package."""


class SpinlabError(Exception):
    pass


class ConfigError(SpinlabError, ValueError):
    """Invalid experiment or command configuration (unknown model, n = 0, ...)."""


class ModelContractError(SpinlabError):
    """A pluggable model broke its contract, e.g. a response outside {-1, +1}."""


class InvalidCorrelationError(ModelContractError):
    """A correlation function returned a value outside [-1 - tol, 1 + tol]."""


class EmptySelectionError(SpinlabError, LookupError):
    """No trial records matched the requested setting pair."""
