class EchoLabError(Exception):
    """Base class for library errors."""


class GridMismatchError(EchoLabError, ValueError):
    pass


class NormalizationError(EchoLabError, ValueError):
    pass


class PropagationError(EchoLabError, RuntimeError):
    """Norm drift or another integrity failure during propagation."""


class AccuracyError(EchoLabError, RuntimeError):
    """Step-halving or finite-difference consistency check failed."""


class FitError(EchoLabError, ValueError):
    pass


class ConfigError(EchoLabError, ValueError):
    pass


class IllConditionedError(EchoLabError, RuntimeError):
    """A numerical inversion could not be certified by its round trip."""


class ConvergenceWarning(UserWarning):
    pass
