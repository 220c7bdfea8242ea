"""Kernel backend selection.

The hot inner loop of every estimator is the trim evaluation of a residual
vector (median, MAD, depths, kept set, trimmed sum of squares).  A compiled
extension provides it when built; a pure numpy implementation is the
fallback.  Set ``LST_PURE_PYTHON=1`` to force the fallback (used by the
backend benchmark and for debugging).
"""

import os

if os.environ.get("LST_PURE_PYTHON"):
    from . import _pure as _impl
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.NAME
median = _impl.median
mad = _impl.mad
trim_stats = _impl.trim_stats
h_smallest = _impl.h_smallest

__all__ = ["BACKEND", "median", "mad", "trim_stats", "h_smallest"]
