"""Kernel backend selection: compiled core when available, pure Python otherwise.

Set LEXFLUX_PURE=1 before import to force the fallback. Both backends expose
the same surface (``ShardAggregator``, ``contribution_values``) with pinned
behavioral parity; only throughput differs.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import pure as _pure

_compiled: ModuleType | None = None
if not os.environ.get("LEXFLUX_PURE"):
    try:
        from . import _speedups as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _pure

BACKEND: str = _active.BACKEND_NAME
ShardAggregator = _active.ShardAggregator
contribution_values = _active.contribution_values


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_backend(name: str | None = None) -> ModuleType:
    """Return a backend module by name; default is the active one."""
    if name is None:
        return _active
    if name == "python":
        return _pure
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this install")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
