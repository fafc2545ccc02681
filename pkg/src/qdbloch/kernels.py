"""Backend selection for the batched per-cell Bloch update.

The compiled Cython kernel is used when it was built; otherwise the numpy
implementation takes over.  Set ``QDBLOCH_BACKEND=numpy`` to force the
fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"numpy": _fallback.bloch_sweep}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.bloch_sweep

_requested = os.environ.get("QDBLOCH_BACKEND", "").strip().lower()
if _requested and _requested not in BACKENDS:
    raise ImportError(f"QDBLOCH_BACKEND={_requested!r} is not available (have {sorted(BACKENDS)})")
BACKEND = _requested or ("cython" if "cython" in BACKENDS else "numpy")
bloch_sweep = BACKENDS[BACKEND]


def get_sweep(name: str | None = None):
    """Return the sweep function for ``name`` (default: the selected backend)."""
    return BACKENDS[name or BACKEND]
