"""Kernel backend selection.

The compiled extension is preferred. Set ``SPIKELSM_BACKEND=python`` to
force the numpy fallback, or ``SPIKELSM_BACKEND=cython`` to fail loudly if
the extension is missing.
"""

import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)


def _load():
    wanted = os.environ.get("SPIKELSM_BACKEND", "auto").strip().lower()
    if wanted == "python":
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        if wanted == "cython":
            raise
        logger.debug("compiled kernels unavailable, using numpy fallback")
        return _pykernels
    return _ckernels


kernels = _load()


def available():
    """Names of every importable backend, compiled first."""
    names = []
    try:
        from . import _ckernels  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names


def get(name):
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
