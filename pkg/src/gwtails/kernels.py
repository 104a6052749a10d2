"""Backend selection for the inner loops.

The compiled extension ``gwtails._ckernels`` is used when it imports;
otherwise the numpy versions in ``gwtails._pykernels`` take over. Set
``GWTAILS_BACKEND=python`` to force the fallback. ``GWTAILS_THREADS`` caps the
number of worker threads used to split large batches (the compiled loops
release the GIL). Chunk boundaries never affect results.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

__all__ = ["BACKEND", "available_backends", "get_backend", "worker_count", "map_chunks"]


def available_backends():
    return ["c", "python"] if _ckernels is not None else ["python"]


def get_backend(name=None):
    """Return the kernel module for ``name`` ("c" or "python"; default: env/auto)."""
    name = name or os.environ.get("GWTAILS_BACKEND", "").lower() or None
    if name in (None, "auto", "c", "cython"):
        if _ckernels is not None:
            return _ckernels
        if name in ("c", "cython"):
            raise ImportError("compiled kernels are not built")
        return _pykernels
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


BACKEND = "c" if get_backend() is not _pykernels else "python"


def worker_count():
    env = os.environ.get("GWTAILS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def map_chunks(func, n, chunk=1 << 16, workers=None):
    """Apply ``func(lo, hi)`` over ``[0, n)`` in fixed chunks; results in order."""
    bounds = [(lo, min(n, lo + chunk)) for lo in range(0, n, chunk)]
    workers = workers or worker_count()
    if workers <= 1 or len(bounds) <= 1:
        return [func(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: func(*b), bounds))


def concat(parts):
    return tuple(None if p[0] is None else np.concatenate(p) for p in zip(*parts))
