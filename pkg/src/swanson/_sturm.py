"""Compiled kernels for symmetric tridiagonal eigenvalues by Sturm bisection."""
import numpy as np
from numba import njit

_SAFMIN = np.finfo(float).tiny


@njit(cache=True)
def count_below(diag, off2, lam, pivmin):
    """Number of eigenvalues strictly below ``lam`` (LDL^T sign count)."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - lam
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = diag[i] - lam - off2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def bisect_lowest(diag, off2, n_eig, lo, hi, rtol, pivmin):
    """Lowest ``n_eig`` eigenvalues, each bisected until the bracket is below rtol*max(1,|E|)."""
    out = np.empty(n_eig)
    a = lo
    for k in range(n_eig):
        left = a
        right = hi
        while True:
            mid = 0.5 * (left + right)
            if mid <= left or mid >= right:
                break
            if right - left <= rtol * max(1.0, abs(mid)):
                break
            if count_below(diag, off2, mid, pivmin) <= k:
                left = mid
            else:
                right = mid
        out[k] = 0.5 * (left + right)
        a = left
    return out
