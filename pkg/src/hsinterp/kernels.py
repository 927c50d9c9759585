"""Hot loops, each with a numba kernel and an equivalent numpy path.

The public functions dispatch on :data:`hsinterp._accel.USE_NUMBA`. Both
paths are kept callable (``*_numba`` / ``*_numpy``) so they can be checked
against each other and benchmarked.
"""

import numpy as np

from . import _accel
from ._accel import njit


# ---------------------------------------------------------------------------
# through-origin line scan
# ---------------------------------------------------------------------------

@njit(cache=True)
def _slope_scan_loop(x, y, upper, slopes):
    n_slopes = slopes.shape[0]
    n = x.shape[0]
    out = np.zeros(n_slopes, dtype=np.int64)
    for j in range(n_slopes):
        s = slopes[j]
        count = 0
        for i in range(n):
            above = y[i] > s * x[i]
            if above == upper[i]:
                count += 1
        out[j] = count
    return out


def slope_scan_numba(x, y, upper, slopes):
    return _slope_scan_loop(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(upper, dtype=np.bool_),
        np.ascontiguousarray(slopes, dtype=np.float64),
    )


def slope_scan_numpy(x, y, upper, slopes, chunk=64):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    upper = np.asarray(upper, dtype=bool)
    slopes = np.asarray(slopes, dtype=np.float64)
    out = np.empty(slopes.shape[0], dtype=np.int64)
    for start in range(0, slopes.shape[0], chunk):
        s = slopes[start:start + chunk, None]
        above = y[None, :] > s * x[None, :]
        out[start:start + chunk] = np.count_nonzero(above == upper[None, :], axis=1)
    return out


def slope_scan(x, y, upper, slopes):
    """Count points on their expected side of each line ``y = s * x``.

    A point is "above" when ``y > s * x`` strictly. ``upper[i]`` says whether
    point ``i`` is expected above the line. Returns one count per slope.
    """
    if _accel.USE_NUMBA:
        return slope_scan_numba(x, y, upper, slopes)
    return slope_scan_numpy(x, y, upper, slopes)


# ---------------------------------------------------------------------------
# per-pixel normalized difference
# ---------------------------------------------------------------------------

@njit(cache=True)
def _normalized_difference_loop(pixels, low_idx, high_idx):
    n = pixels.shape[0]
    out = np.empty(n, dtype=np.float64)
    n_low = low_idx.shape[0]
    n_high = high_idx.shape[0]
    for i in range(n):
        lo = 0.0
        for k in range(n_low):
            lo += pixels[i, low_idx[k]]
        lo /= n_low
        hi = 0.0
        for k in range(n_high):
            hi += pixels[i, high_idx[k]]
        hi /= n_high
        den = hi + lo
        if den == 0.0:
            out[i] = np.nan
        else:
            out[i] = (hi - lo) / den
    return out


def normalized_difference_numba(pixels, low_idx, high_idx):
    return _normalized_difference_loop(
        np.ascontiguousarray(pixels, dtype=np.float64),
        np.ascontiguousarray(low_idx, dtype=np.int64),
        np.ascontiguousarray(high_idx, dtype=np.int64),
    )


def normalized_difference_numpy(pixels, low_idx, high_idx):
    pixels = np.asarray(pixels, dtype=np.float64)
    lo = pixels[:, low_idx].mean(axis=1)
    hi = pixels[:, high_idx].mean(axis=1)
    den = hi + lo
    out = np.full(pixels.shape[0], np.nan)
    ok = den != 0.0
    out[ok] = (hi[ok] - lo[ok]) / den[ok]
    return out


def normalized_difference(pixels, low_idx, high_idx):
    """(high - low) / (high + low) per row of a pixel matrix; NaN where undefined.

    ``low`` and ``high`` are the row means over the given band indices.
    """
    if _accel.USE_NUMBA:
        return normalized_difference_numba(pixels, low_idx, high_idx)
    return normalized_difference_numpy(pixels, low_idx, high_idx)
