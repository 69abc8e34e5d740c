"""Backend selection for the hot numeric kernels.

``VCELLSIM_BACKEND`` picks the implementation: ``numba`` (default when
importable), ``numpy`` (pure fallback), or ``auto``. Both expose the same
functions; tests cross-check them.
"""

from __future__ import annotations

import importlib
import logging
import os

_ENV_VAR = "VCELLSIM_BACKEND"
_VALID = ("auto", "numba", "numpy")
_cache: dict[str, object] = {}
_default = None

log = logging.getLogger(__name__)


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` (or the env-selected default)."""
    global _default
    if name is None:
        if _default is None:
            _default = _resolve(os.environ.get(_ENV_VAR, "auto").strip().lower())
        return _default
    return _resolve(name)


def backend_name() -> str:
    return get_kernels().NAME


def _resolve(name: str):
    if name not in _VALID:
        raise ValueError(f"{_ENV_VAR} must be one of {_VALID}, got {name!r}")
    if name == "auto":
        try:
            return _load("numba")
        except ImportError:
            log.info("numba unavailable, falling back to the numpy backend")
            return _load("numpy")
    return _load(name)


def _load(name: str):
    if name not in _cache:
        _cache[name] = importlib.import_module(f"{__name__}.{name}_impl")
    return _cache[name]
