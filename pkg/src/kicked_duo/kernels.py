"""Selects the classical-map kernels at import time.

The compiled ``_ckernels`` extension is used when it was built; otherwise,
or when ``KICKED_DUO_PURE_PYTHON`` is set, the numpy implementation in
``_pykernels`` is used.  Both share one signature per routine and operate in
place on float64 arrays.
"""

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None


def available_backends() -> dict[str, ModuleType]:
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    return backends


def get_backend(name: str | None = None) -> ModuleType:
    backends = available_backends()
    if name is None:
        if os.environ.get("KICKED_DUO_PURE_PYTHON") or _ckernels is None:
            name = "python"
        else:
            name = "cython"
    try:
        return backends[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(backends)}") from None


backend = get_backend()
BACKEND_NAME = "cython" if backend is _ckernels and _ckernels is not None else "python"

free_flight = backend.free_flight
kick = backend.kick
coupled_steps = backend.coupled_steps
standard_map_steps = backend.standard_map_steps
