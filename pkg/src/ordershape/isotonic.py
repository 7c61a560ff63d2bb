"""Weighted isotonic regression with a brute-force max-min oracle.

The fast path is a stack-based pool-adjacent-violators solve (compiled kernel
when available, see ``_backend``). ``maxmin_oracle`` evaluates the max-min
characterization of the solution literally in O(n^3); it exists purely to
cross-check the fast path and is only usable at test scale.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import pava_fit
from .errors import InputError

__all__ = ["IsotonicFit", "pava", "pava_decreasing", "maxmin_oracle", "grouped_pava"]


@dataclass(frozen=True)
class IsotonicFit:
    """Monotone fitted sequence with its pooled-block structure.

    ``blocks`` holds ``(start, end, value)`` with inclusive 0-based indices;
    blocks partition the index range contiguously, carry strictly monotone
    pooled values, and each pooled value equals the weighted mean of the input
    over the block.
    """

    fitted: np.ndarray
    blocks: list[tuple[int, int, float]]
    direction: str  # "nondecreasing" | "nonincreasing"


def _validate(values, weights):
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InputError("values must be a nonempty 1-D sequence")
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.ascontiguousarray(weights, dtype=np.float64)
        if w.shape != v.shape:
            raise InputError(
                f"length mismatch: {v.size} values vs {w.size} weights"
            )
    if not np.isfinite(v).all():
        raise InputError("values contain NaN or infinity")
    if not np.isfinite(w).all() or (w <= 0).any():
        raise InputError("weights must be finite and strictly positive")
    return v, w


def _blocks_from_fitted(fitted):
    change = np.flatnonzero(np.diff(fitted) != 0.0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [fitted.size - 1]))
    return [(int(s), int(e), float(fitted[s])) for s, e in zip(starts, ends)]


def pava(values, weights=None) -> IsotonicFit:
    """Minimize sum w_i (values_i - z_i)^2 over nondecreasing z.

    Returns the unique minimizer, which coincides with the max-min formula
    ``z_i = max_{a<=i} min_{b>=i} weightedmean(values[a..b])`` at every index.
    """
    v, w = _validate(values, weights)
    fitted = pava_fit(v, w, increasing=True)
    return IsotonicFit(fitted, _blocks_from_fitted(fitted), "nondecreasing")


def pava_decreasing(values, weights=None) -> IsotonicFit:
    """Same as :func:`pava` under the nonincreasing constraint (negate-fit-negate)."""
    v, w = _validate(values, weights)
    fitted = pava_fit(v, w, increasing=False)
    return IsotonicFit(fitted, _blocks_from_fitted(fitted), "nonincreasing")


def maxmin_oracle(values, weights=None, direction="nondecreasing"):
    """Literal max-min evaluation of the isotonic fit, O(n^3). Test oracle only.

    nondecreasing: z_i = max_{a<=i} min_{b>=i} mean(a..b)
    nonincreasing: z_i = max_{b>=i} min_{a<=i} mean(a..b)
    """
    v, w = _validate(values, weights)
    if direction not in ("nondecreasing", "nonincreasing"):
        raise InputError(f"unknown direction: {direction!r}")
    n = v.size
    csum = np.concatenate(([0.0], np.cumsum(v * w)))
    cw = np.concatenate(([0.0], np.cumsum(w)))

    def mean(a, b):  # inclusive indices
        return (csum[b + 1] - csum[a]) / (cw[b + 1] - cw[a])

    out = np.empty(n)
    for i in range(n):
        if direction == "nondecreasing":
            out[i] = max(min(mean(a, b) for b in range(i, n)) for a in range(i + 1))
        else:
            out[i] = max(min(mean(a, b) for a in range(i + 1)) for b in range(i, n))
    return out


def grouped_pava(values, group_ids, num_groups):
    """Isotonic fit at group resolution for contiguously grouped inputs.

    ``group_ids[j]`` in ``1..num_groups`` gives the group of the j-th value;
    groups must be contiguous, ordered, and nonempty. Returns the ``num_groups``
    nondecreasing group values minimizing ``sum_j (values_j - out[group_ids_j])^2``,
    i.e. PAVA applied to the group means with group sizes as weights.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    g = np.ascontiguousarray(group_ids, dtype=np.intp)
    if v.shape != g.shape or v.ndim != 1 or v.size == 0:
        raise InputError("values and group_ids must be matching nonempty 1-D sequences")
    if not np.isfinite(v).all():
        raise InputError("values contain NaN or infinity")
    d = int(num_groups)
    if d < 1:
        raise InputError("num_groups must be >= 1")
    if g.min() < 1:
        raise InputError("group ids must lie in 1..num_groups")
    if (np.diff(g) < 0).any():
        raise InputError("group ids must form contiguous ordered groups (nondecreasing along the sequence)")
    counts = np.bincount(g - 1, minlength=d)
    if counts.size != d or (counts == 0).any():
        raise InputError("every group 1..num_groups must be nonempty")
    means = np.bincount(g - 1, weights=v, minlength=d) / counts
    return pava_fit(means, counts.astype(np.float64), increasing=True)
