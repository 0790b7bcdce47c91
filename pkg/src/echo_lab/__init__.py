"""Echo-decay laboratory: quantum kicked rotor, standard map and driven quartic oscillator."""

__version__ = "0.1.0"

from .kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
