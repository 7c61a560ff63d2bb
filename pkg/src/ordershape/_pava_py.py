"""Pure-Python pool-adjacent-violators kernel (fallback backend).

Same algorithm and merge rule as the compiled kernel in ``_pava.pyx``; kept
line-for-line comparable so the two stay in sync.
"""

import numpy as np


def pava(values, weights):
    """Nondecreasing weighted least-squares isotonic fit (stack-based, O(n))."""
    n = values.shape[0]
    fitted = np.empty(n, dtype=np.float64)
    if n == 0:
        return fitted

    bmean = np.empty(n, dtype=np.float64)
    bweight = np.empty(n, dtype=np.float64)
    bstart = np.empty(n, dtype=np.intp)

    top = -1
    for i in range(n):
        top += 1
        bmean[top] = values[i]
        bweight[top] = weights[i]
        bstart[top] = i
        while top > 0 and bmean[top - 1] >= bmean[top]:
            w = bweight[top - 1] + bweight[top]
            bmean[top - 1] += (bmean[top] - bmean[top - 1]) * (bweight[top] / w)
            bweight[top - 1] = w
            top -= 1

    stop = n
    for j in range(top, -1, -1):
        fitted[bstart[j]:stop] = bmean[j]
        stop = bstart[j]
    return fitted
