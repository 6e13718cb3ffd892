"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the numpy
fallback. Setting ``KITAEVNET_BACKEND=python`` forces the fallback.
"""

import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)


def _load_compiled():
    try:
        from . import _core
    except ImportError:
        return None
    return _core


_compiled = _load_compiled()

if os.environ.get("KITAEVNET_BACKEND", "").lower() == "python" or _compiled is None:
    _impl = _fallback
    BACKEND = "python"
else:
    _impl = _compiled
    BACKEND = "compiled"

if _compiled is None:
    logger.debug("compiled kernels unavailable; using numpy fallback")


def get_backend(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("kitaevnet._core is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available():
    return _compiled is not None


apply_terms = _impl.apply_terms
term_action = _impl.term_action
pair_correlators = _impl.pair_correlators
