"""Select the invariant-imbedding propagation kernel at import.

The compiled extension :mod:`asymscat._imbed` is preferred; the pure-Python
twin :mod:`asymscat._imbed_py` is the fallback.  Set ``ASYMSCAT_BACKEND`` to
``python`` or ``cython`` to force a choice (``cython`` raises if the
extension is missing); anything else means auto.
"""

import os

_requested = os.environ.get("ASYMSCAT_BACKEND", "auto").lower()

if _requested == "python":
    from . import _imbed_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _imbed as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _imbed_py as _impl

        BACKEND = "python"

propagate_stabilized = _impl.propagate_stabilized

__all__ = ["propagate_stabilized", "BACKEND"]
