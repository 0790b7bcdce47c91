"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback takes over. Setting ``ECHO_LAB_BACKEND=python`` forces the
fallback (handy for testing and benchmarking).
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("ECHO_LAB_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "compiled"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("compiled", "python" or None for the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def osc_orbits(*args, backend=None):
    return get_backend(backend).osc_orbits(*args)


def std_map_stats(*args, backend=None):
    return get_backend(backend).std_map_stats(*args)


def lyapunov_tangent(*args, backend=None):
    return get_backend(backend).lyapunov_tangent(*args)
