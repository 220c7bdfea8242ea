# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trim-evaluation kernels.

Same contract as ``lstregress._kernels._pure``; see that module for the
semantics.  Order statistics are computed with an iterative quickselect so
a full trim evaluation is O(n).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"


cdef inline void _swap(double* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double t = a[i]
    a[i] = a[j]
    a[j] = t


cdef double _select(double* a, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    """kth (0-based) smallest of a[0:n]; partially reorders a in place."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot
    while hi > lo:
        # median-of-three pivot, stored at lo
        mid = lo + (hi - lo) // 2
        if a[mid] < a[lo]:
            _swap(a, lo, mid)
        if a[hi] < a[lo]:
            _swap(a, lo, hi)
        if a[hi] < a[mid]:
            _swap(a, mid, hi)
        pivot = a[mid]
        _swap(a, mid, lo)
        i = lo
        j = hi + 1
        while True:
            i += 1
            while i <= hi and a[i] < pivot:
                i += 1
            j -= 1
            while a[j] > pivot:
                j -= 1
            if i >= j:
                break
            _swap(a, i, j)
        _swap(a, lo, j)
        if j == k:
            return a[k]
        elif j > k:
            hi = j - 1
        else:
            lo = j + 1
    return a[k]


cdef double _median_scratch(double* buf, Py_ssize_t n) noexcept nogil:
    """Median of buf[0:n]; reorders buf."""
    cdef Py_ssize_t lo = (n - 1) // 2
    cdef Py_ssize_t hi = n // 2
    cdef double a = _select(buf, n, lo)
    cdef double b
    cdef Py_ssize_t i
    if hi == lo:
        return a
    # after selecting lo, positions > lo hold values >= a; the next order
    # statistic is their minimum
    b = buf[lo + 1]
    for i in range(lo + 2, n):
        if buf[i] < b:
            b = buf[i]
    return 0.5 * (a + b)


def median(v):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        raise ValueError("median of an empty vector")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = arr.copy()
    return _median_scratch(&buf[0], n)


def mad(v):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        raise ValueError("median of an empty vector")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = arr.copy()
    cdef double m = _median_scratch(&buf[0], n)
    cdef Py_ssize_t i
    for i in range(n):
        buf[i] = arr[i] - m
        if buf[i] < 0:
            buf[i] = -buf[i]
    return _median_scratch(&buf[0], n)


def trim_stats(r, double alpha):
    """See ``lstregress._kernels._pure.trim_stats``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        raise ValueError("median of an empty vector")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = arr.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] depths = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] kept = np.empty(n, dtype=np.uint8)
    cdef double m, s, sigma, q, d
    cdef Py_ssize_t i, kcount
    cdef bint degenerate

    m = _median_scratch(&buf[0], n)
    for i in range(n):
        d = arr[i] - m
        if d < 0:
            d = -d
        buf[i] = d
        depths[i] = d
    s = _median_scratch(&buf[0], n)
    degenerate = s == 0.0
    sigma = 1.0 if degenerate else s
    q = 0.0
    kcount = 0
    for i in range(n):
        d = depths[i] / sigma
        depths[i] = d
        if d <= alpha:
            kept[i] = 1
            kcount += 1
            q += arr[i] * arr[i]
        else:
            kept[i] = 0
    return m, sigma, bool(degenerate), depths, kept.view(np.bool_), q, kcount


def h_smallest(values, Py_ssize_t h):
    """See ``lstregress._kernels._pure.h_smallest``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = arr.shape[0]
    if not 1 <= h <= n:
        raise ValueError(f"h={h} out of range for n={n}")
    cdef cnp.ndarray[cnp.intp_t, ndim=1] out = np.empty(h, dtype=np.intp)
    cdef Py_ssize_t i, k
    if h == n:
        for i in range(n):
            out[i] = i
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = arr.copy()
    cdef double t = _select(&buf[0], n, h - 1)
    cdef Py_ssize_t below = 0
    for i in range(n):
        if arr[i] < t:
            below += 1
    cdef Py_ssize_t need = h - below
    k = 0
    for i in range(n):
        if arr[i] < t:
            out[k] = i
            k += 1
        elif arr[i] == t and need > 0:
            out[k] = i
            k += 1
            need -= 1
    return np.sort(out)
