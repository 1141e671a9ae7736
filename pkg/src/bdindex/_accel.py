"""Kernel backend selection.

The numba backend is used when numba imports cleanly, unless the environment
variable ``BDINDEX_DISABLE_NUMBA`` is set to a truthy value, in which case the
plain numpy kernels run instead.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_numpy

ENV_FLAG = "BDINDEX_DISABLE_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


def _load_numba() -> ModuleType | None:
    try:
        from . import _kernels_numba
    except ImportError:
        return None
    return _kernels_numba


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ('numba' or 'numpy'); ``None`` picks the default."""
    if name is None:
        name = "numpy" if numba_disabled() else "numba"
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        mod = _load_numba()
        return mod if mod is not None else _kernels_numpy
    raise ValueError(f"unknown kernel backend {name!r}")


def backend_name(mod: ModuleType) -> str:
    return "numpy" if mod is _kernels_numpy else "numba"
