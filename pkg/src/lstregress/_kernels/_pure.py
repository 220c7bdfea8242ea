"""Pure numpy implementation of the trim-evaluation kernels.

This is the fallback backend used when the compiled extension is not
available (see ``lstregress._kernels``).  Both backends implement the same
contract:

* ``median``   -- middle order statistic, mean of the two central order
  statistics for even length.
* ``mad``      -- median of absolute deviations from the median, with no
  consistency factor.
* ``trim_stats`` -- one-shot evaluation of location, scale, depths, kept
  mask and trimmed sum of squares for a residual vector.
* ``h_smallest`` -- indices of the h smallest values, ties broken by the
  lower index.

Order statistics (median, MAD, kept sets, h-subsets) are bitwise identical
across backends; the summed objective may differ in the last bits because
the accumulation order differs.
"""

import numpy as np

NAME = "pure"


def median(v):
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    if n == 0:
        raise ValueError("median of an empty vector")
    lo = (n - 1) // 2
    hi = n // 2
    part = np.partition(v, (lo, hi))
    return 0.5 * (part[lo] + part[hi])


def mad(v):
    v = np.asarray(v, dtype=np.float64)
    return median(np.abs(v - median(v)))


def trim_stats(r, alpha):
    """Evaluate the depth trim of a residual vector in one pass.

    Returns ``(m, sigma, degenerate, depths, kept_mask, q, kept_count)``
    where ``m`` is the residual median, ``sigma`` the residual MAD (set to
    1.0 when the MAD vanishes, with ``degenerate`` flagging that case),
    ``depths[i] = |r[i] - m| / sigma``, ``kept_mask[i] = depths[i] <= alpha``
    and ``q`` the sum of squared kept residuals.
    """
    r = np.asarray(r, dtype=np.float64)
    m = median(r)
    dev = np.abs(r - m)
    s = median(dev)
    degenerate = s == 0.0
    sigma = 1.0 if degenerate else float(s)
    depths = dev / sigma
    kept_mask = depths <= alpha
    rk = r[kept_mask]
    q = float(rk @ rk)
    return float(m), sigma, bool(degenerate), depths, kept_mask, q, int(kept_mask.sum())


def h_smallest(values, h):
    """Indices (ascending) of the h smallest values; ties keep lower indices."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if not 1 <= h <= n:
        raise ValueError(f"h={h} out of range for n={n}")
    if h == n:
        return np.arange(n, dtype=np.intp)
    t = np.partition(values, h - 1)[h - 1]
    below = np.flatnonzero(values < t)
    need = h - below.size
    at = np.flatnonzero(values == t)[:need]
    return np.sort(np.concatenate([below, at])).astype(np.intp, copy=False)
