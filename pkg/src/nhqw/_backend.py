"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
NumPy fallback in ``_fallback`` is used. Setting ``NHQW_PURE_PYTHON=1`` in the
environment forces the fallback.
"""
import contextlib
import os

from nhqw import _fallback

try:
    from nhqw import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

if os.environ.get("NHQW_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    _active = "python"
else:
    _active = "cython"


def available_backends():
    """Names of importable backends, compiled first when present."""
    return sorted(_BACKENDS, key=lambda name: name != "cython")


def backend_name():
    return _active


def kernels():
    """The active kernel module."""
    return _BACKENDS[_active]


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch the kernel backend (not thread-safe)."""
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
