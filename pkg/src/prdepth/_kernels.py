"""Compiled inner loops for candidate scoring.

Scoring m candidates against d directions evaluates m*d univariate
locations of n projected residuals; the numpy path materializes and
partitions large temporaries, which dominates fit time.  These kernels do
the same arithmetic cell by cell with reused buffers.  Selection returns
exact order statistics and the even-length average is a power-of-two
scaling, so median results are bit-identical to ``np.median``.

Everything here is optional: callers fall back to the numpy path when
numba is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # noqa: D103
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


@njit(cache=True)
def _select_kth(buf, lo, hi, k):
    """In-place quickselect: place the k-th smallest of buf[lo:hi+1] at k."""
    while True:
        if lo >= hi:
            return buf[k]
        mid = (lo + hi) // 2
        # median-of-three pivot
        a, b, c = buf[lo], buf[mid], buf[hi]
        if a > b:
            a, b = b, a
        if b > c:
            b = c if a <= c else a
        pivot = b
        i, j = lo, hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                buf[i], buf[j] = buf[j], buf[i]
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return buf[k]


@njit(cache=True)
def _median_inplace(buf):
    n = buf.shape[0]
    k = n // 2
    upper = _select_kth(buf, 0, n - 1, k)
    if n % 2 == 1:
        return upper
    lower = buf[0]
    for t in range(1, k):
        if buf[t] > lower:
            lower = buf[t]
    return (lower + upper) / 2.0


@njit(cache=True, parallel=True)
def median_abs_scores(res, den, out):
    """out[i, j] = |median(res[i] / den[j])| for full-valid directions."""
    m, n = res.shape
    d = den.shape[0]
    for i in prange(m):
        buf = np.empty(n)
        for j in range(d):
            for t in range(n):
                buf[t] = res[i, t] / den[j, t]
            v = _median_inplace(buf)
            out[i, j] = -v if v < 0 else v


@njit(cache=True, parallel=True)
def pwm_abs_scores(res, den, k, c, out):
    """out[i, j] = |depth-weighted mean of res[i]/den[j]|.

    Zero-MAD cells fall back to the plain median, matching the numpy path.
    """
    m, n = res.shape
    d = den.shape[0]
    ek = math.exp(-k)
    for i in prange(m):
        z = np.empty(n)
        adev = np.empty(n)
        scratch = np.empty(n)
        for j in range(d):
            for t in range(n):
                z[t] = res[i, t] / den[j, t]
                scratch[t] = z[t]
            med = _median_inplace(scratch)
            for t in range(n):
                a = z[t] - med
                adev[t] = -a if a < 0 else a
                scratch[t] = adev[t]
            madz = _median_inplace(scratch)
            if madz <= 0.0:
                val = med
            else:
                num = 0.0
                tot = 0.0
                for t in range(n):
                    depth = 1.0 / (1.0 + adev[t] / madz)
                    if depth < c:
                        wgt = (math.exp(-k * (1.0 - depth / c) ** 2) - ek) \
                            / (1.0 - ek)
                    else:
                        wgt = 1.0
                    num += wgt * z[t]
                    tot += wgt
                val = num / tot if tot > 0.0 else med
            out[i, j] = -val if val < 0 else val
