"""Kernel backend selection.

Two interchangeable kernel modules exist: ``_kernels_nb`` (numba-jitted
loops, the default when numba imports cleanly) and ``_kernels_np``
(pure numpy).  The environment variable ``STREAMPCA_BACKEND`` picks one
at first use:

    auto    prefer numba, fall back to numpy (default)
    numba   require the compiled backend, fail if unavailable
    numpy   force the pure-numpy fallback

``set_backend`` overrides the choice programmatically (used by tests and
the ``bench`` subcommand).  Integer kernels match bit-for-bit across
backends; float kernels agree to rounding, so reproducibility guarantees
are stated per backend and run manifests record which one was active.
"""

from __future__ import annotations

import os
from types import ModuleType

from .errors import InvalidArgumentError

ENV_VAR = "STREAMPCA_BACKEND"
_CHOICES = ("auto", "numba", "numpy")

_active: ModuleType | None = None
_active_name: str | None = None


def _load(name: str) -> ModuleType:
    if name == "numpy":
        from . import _kernels_np

        return _kernels_np
    if name == "numba":
        from . import _kernels_nb

        return _kernels_nb
    raise InvalidArgumentError(f"unknown backend {name!r}, expected one of {_CHOICES}")


def available_backends() -> tuple[str, ...]:
    """Backends that import successfully on this machine."""
    names = ["numpy"]
    try:
        _load("numba")
        names.insert(0, "numba")
    except ImportError:
        pass
    return tuple(names)


def set_backend(name: str) -> str:
    """Select a backend by name; ``auto`` prefers numba.  Returns the name chosen."""
    global _active, _active_name
    if name not in _CHOICES:
        raise InvalidArgumentError(f"unknown backend {name!r}, expected one of {_CHOICES}")
    if name == "auto":
        try:
            _active = _load("numba")
            _active_name = "numba"
        except ImportError:
            _active = _load("numpy")
            _active_name = "numpy"
    else:
        _active = _load(name)
        _active_name = name
    return _active_name


def kernels() -> ModuleType:
    """The active kernel module, resolving ``STREAMPCA_BACKEND`` on first use."""
    if _active is None:
        set_backend(os.environ.get(ENV_VAR, "auto"))
    assert _active is not None
    return _active


def backend_name() -> str:
    kernels()
    assert _active_name is not None
    return _active_name
