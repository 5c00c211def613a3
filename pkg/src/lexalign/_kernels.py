"""Hot loops for the permutation Monte Carlo, with a pure-numpy fallback.

The cross-sum kernel evaluates, for a batch of category permutations p,

    T[k] = sum_{i<j} x[i,j] * y[p[k,i], p[k,j]]

where x and y hold doubled tie-averaged ranks.  Doubled ranks are integers, so
every partial sum is an exactly representable float64 for systems up to 512
categories, and the numba and numpy paths produce bit-identical results no
matter how the summation is reordered or blocked.  Set LEXALIGN_NO_NUMBA=1 to
force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

_HAVE_NUMBA = False
if not os.environ.get("LEXALIGN_NO_NUMBA"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        pass


def _cross_sums_numpy(perms: np.ndarray, x_full: np.ndarray, y_full: np.ndarray) -> np.ndarray:
    out = np.empty(perms.shape[0])
    xf = x_full.astype(np.float64).ravel()
    y64 = y_full.astype(np.float64)
    for k in range(perms.shape[0]):
        p = perms[k]
        yp = y64.take(p, axis=0).take(p, axis=1)
        out[k] = 0.5 * np.dot(yp.ravel(), xf)
    return out


if _HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _cross_sums_numba(perms, x_full, y_full):  # pragma: no cover - compiled
        n_perms = perms.shape[0]
        n = x_full.shape[0]
        out = np.empty(n_perms)
        k = 0
        # eight permutations share each streamed pass over x; their gathered
        # y rows stay L1-resident because row i's inner loop reuses them
        while k + 8 <= n_perms:
            p0 = perms[k]
            p1 = perms[k + 1]
            p2 = perms[k + 2]
            p3 = perms[k + 3]
            p4 = perms[k + 4]
            p5 = perms[k + 5]
            p6 = perms[k + 6]
            p7 = perms[k + 7]
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            a4 = 0.0
            a5 = 0.0
            a6 = 0.0
            a7 = 0.0
            for i in range(n - 1):
                xi = x_full[i]
                y0 = y_full[p0[i]]
                y1 = y_full[p1[i]]
                y2 = y_full[p2[i]]
                y3 = y_full[p3[i]]
                y4 = y_full[p4[i]]
                y5 = y_full[p5[i]]
                y6 = y_full[p6[i]]
                y7 = y_full[p7[i]]
                s0 = 0.0
                s1 = 0.0
                s2 = 0.0
                s3 = 0.0
                s4 = 0.0
                s5 = 0.0
                s6 = 0.0
                s7 = 0.0
                for j in range(i + 1, n):
                    xv = np.float64(xi[j])
                    s0 += xv * np.float64(y0[p0[j]])
                    s1 += xv * np.float64(y1[p1[j]])
                    s2 += xv * np.float64(y2[p2[j]])
                    s3 += xv * np.float64(y3[p3[j]])
                    s4 += xv * np.float64(y4[p4[j]])
                    s5 += xv * np.float64(y5[p5[j]])
                    s6 += xv * np.float64(y6[p6[j]])
                    s7 += xv * np.float64(y7[p7[j]])
                a0 += s0
                a1 += s1
                a2 += s2
                a3 += s3
                a4 += s4
                a5 += s5
                a6 += s6
                a7 += s7
            out[k] = a0
            out[k + 1] = a1
            out[k + 2] = a2
            out[k + 3] = a3
            out[k + 4] = a4
            out[k + 5] = a5
            out[k + 6] = a6
            out[k + 7] = a7
            k += 8
        while k < n_perms:
            p = perms[k]
            acc = 0.0
            for i in range(n - 1):
                xi = x_full[i]
                ya = y_full[p[i]]
                s = 0.0
                for j in range(i + 1, n):
                    s += np.float64(xi[j]) * np.float64(ya[p[j]])
                acc += s
            out[k] = acc
            k += 1
        return out


def permuted_cross_sums(perms: np.ndarray, x_full: np.ndarray, y_full: np.ndarray) -> np.ndarray:
    """T[k] = sum_{i<j} x[i,j] * y[p_k(i), p_k(j)] for each permutation row.

    x_full and y_full are symmetric zero-diagonal float32 matrices of doubled
    ranks; perms is (K, n) int32.  Returns exact integer-valued float64 sums.
    """
    if _HAVE_NUMBA:
        return _cross_sums_numba(np.ascontiguousarray(perms), x_full, y_full)
    return _cross_sums_numpy(perms, x_full, y_full)
