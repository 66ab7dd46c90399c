"""Hot-kernel backend selection.

The compiled extension is used when available; the NumPy fallback is
selected otherwise, or when the OPTISL_PURE environment variable is set to
a non-empty value other than "0". Both backends produce identical results.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("OPTISL_PURE", "").strip() not in ("", "0"):
    _impl = _pure
    _BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        _BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        _BACKEND = "pure"

pairwise_edges = _impl.pairwise_edges
encode_step = _impl.encode_step


def backend() -> str:
    """Name of the active backend: "compiled" or "pure"."""
    return _BACKEND
