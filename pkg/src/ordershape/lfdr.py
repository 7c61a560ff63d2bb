"""Local-fdr scores and the adaptive step-up rejection rule.

The rule sorts per-hypothesis local-fdr scores, finds the longest prefix whose
running mean stays at or below the target level, and rejects every hypothesis
scoring at or below that prefix's last order statistic. The equivalent
threshold form picks the largest observed score whose estimated FDR is within
the level; both are provided, plus the full estimated-FDR curve and a
numerical evaluator of the rule's large-m power for the one-sided Gaussian
model.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InputError
from .mixture import _f0_values, _f1_values

__all__ = [
    "DecisionResult",
    "lfdr_values",
    "step_up",
    "threshold_lambda",
    "estimated_fdr_curve",
    "asymptotic_power_gaussian",
]


@dataclass(frozen=True)
class DecisionResult:
    """Per-hypothesis scores and the rejection set of one procedure.

    ``rejected`` is score-set based: every hypothesis scoring at or below
    ``threshold`` is rejected (ties included), and ``k_hat`` reports the
    actual rejected count.
    """

    scores: np.ndarray
    rejected: np.ndarray
    threshold: float
    k_hat: int
    alpha: float
    method: str

    def __post_init__(self):
        if self.rejected.shape != self.scores.shape:
            raise InputError("rejected flags must match scores in length")
        if int(self.rejected.sum()) != self.k_hat:
            raise InputError("k_hat must equal the rejected count")


def lfdr_values(pvalues, pi0, f1, f0=None):
    """Per-hypothesis posterior null probabilities, clipped to [0, 1].

    ``Lfdr_i = pi_i f0(x_i) / (pi_i f0(x_i) + (1 - pi_i) f1(x_i))``; where both
    densities vanish (outside the fitted support) the score is 1, so such
    hypotheses are never rejected.
    """
    p = np.asarray(pvalues, dtype=np.float64)
    pi = np.asarray(pi0, dtype=np.float64)
    if pi.shape != p.shape:
        raise InputError("pi0 must match pvalues in length")
    if (pi <= 0).any() or (pi > 1).any():
        raise InputError("pi0 must lie in (0, 1]")
    num = pi * _f0_values(p, f0)
    den = num + (1.0 - pi) * _f1_values(p, f1)
    with np.errstate(invalid="ignore"):
        out = np.where(den > 0, num / den, 1.0)
    return np.clip(out, 0.0, 1.0)


def _check_scores(scores, alpha):
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InputError("scores must be a nonempty 1-D sequence")
    if not np.isfinite(s).all() or (s < 0).any() or (s > 1).any():
        raise InputError("scores must lie in [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    return s


def step_up(scores, alpha, method="lfdr-step-up") -> DecisionResult:
    """Reject the longest low-score prefix whose running mean stays <= alpha.

    Scores are sorted ascending; ``k`` is the largest index whose prefix mean
    is at most ``alpha`` (0 if none). All hypotheses scoring at or below the
    k-th order statistic are rejected, so boundary ties enter together.
    """
    s = _check_scores(scores, alpha)
    order = np.sort(s)
    means = np.cumsum(order) / np.arange(1, s.size + 1)
    passing = np.flatnonzero(means <= alpha)
    if passing.size == 0:
        return DecisionResult(s, np.zeros(s.size, dtype=bool), 0.0, 0, alpha, method)
    cutoff = float(order[passing[-1]])
    rejected = s <= cutoff
    return DecisionResult(s, rejected, cutoff, int(rejected.sum()), alpha, method)


def _fdr_at_candidates(s):
    """Estimated FDR at each distinct score: mean of scores <= that score."""
    order = np.sort(s)
    lam = np.unique(order)
    counts = np.searchsorted(order, lam, side="right")
    sums = np.cumsum(order)[counts - 1]
    return lam, sums / counts


def threshold_lambda(scores, alpha) -> float:
    """Largest observed score whose estimated FDR is <= alpha (0 if none).

    Rejecting all scores at or below the returned value reproduces
    :func:`step_up`'s rejection set.
    """
    s = _check_scores(scores, alpha)
    lam, fdr = _fdr_at_candidates(s)
    passing = lam[fdr <= alpha]
    return float(passing[-1]) if passing.size else 0.0


def estimated_fdr_curve(scores):
    """Table of (distinct score, estimated FDR at that threshold), sorted.

    The estimate is the mean of all scores at or below the threshold; it is
    not guaranteed monotone in the threshold.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InputError("scores must be a nonempty 1-D sequence")
    lam, fdr = _fdr_at_candidates(s)
    return np.column_stack([lam, fdr])


def asymptotic_power_gaussian(pi0_values, ks, alpha, *, grid_size=2000) -> float:
    """Large-m power of the step-up rule for the one-sided Gaussian model.

    The model: null z ~ N(0,1), alternative z ~ N(ks, 1), p = 1 - Phi(z), and
    a nondecreasing prior curve tabulated by ``pi0_values`` on an equally
    spaced grid over [0, 1] (sorted prior draws work directly). For a score
    cutoff ``lam`` the rule rejects hypothesis fraction x when its p-value is
    below ``t(lam, x)``, the point where the alternative/null density ratio
    falls to ``w = pi0(x)(1-lam) / ((1-pi0(x)) lam)``; with the Gaussian ratio
    ``exp(ks * z(t) - ks^2/2)`` this threshold is closed-form. The returned
    value is ``D2(lam0) / (1 - kappa0)`` where ``lam0`` is the largest cutoff
    whose limiting estimated FDR ``R = D1/D0`` stays at or below ``alpha``:

        D0 = integral of pi0 t + (1 - pi0) F1(t)   (rejection fraction)
        D1 = integral of pi0 t                     (null rejections)
        D2 = integral of (1 - pi0) F1(t)           (true positives)
        kappa0 = integral of pi0.

    Integrals use the composite trapezoid rule on ``grid_size`` points; lam0
    is refined by bisection over the observed sign change of R - alpha.
    Returns 0.0 when no cutoff is feasible.
    """
    v = np.asarray(pi0_values, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise InputError("pi0_values must tabulate the prior on at least two grid points")
    if not np.isfinite(v).all() or (v < 0).any() or (v > 1).any():
        raise InputError("pi0_values must lie in [0, 1]")
    if ks <= 0:
        raise InputError("ks must be positive")
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")

    x = np.linspace(0.0, 1.0, grid_size)
    pi = np.interp(x, np.linspace(0.0, 1.0, v.size), v)
    pi = np.clip(pi, 1e-12, 1.0 - 1e-12)
    kappa0 = float(np.trapezoid(pi, x))

    def terms(lam):
        with np.errstate(divide="ignore"):
            z_cut = np.log(pi * (1.0 - lam) / ((1.0 - pi) * lam)) / ks + ks / 2.0
        t = ndtr(-z_cut)
        f1_cdf = ndtr(ks - z_cut)
        d0 = float(np.trapezoid(pi * t + (1.0 - pi) * f1_cdf, x))
        d1 = float(np.trapezoid(pi * t, x))
        d2 = float(np.trapezoid((1.0 - pi) * f1_cdf, x))
        return d0, d1, d2

    def excess(lam):
        d0, d1, _ = terms(lam)
        return (d1 / d0 if d0 > 0 else 0.0) - alpha

    lam_grid = np.linspace(1e-8, 1.0, 512)
    vals = np.array([excess(l) for l in lam_grid])
    feasible = np.flatnonzero(vals <= 0)
    if feasible.size == 0:
        return 0.0
    i = feasible[-1]
    if i == lam_grid.size - 1:
        lam0 = 1.0
    else:
        lo, hi = lam_grid[i], lam_grid[i + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if excess(mid) <= 0:
                lo = mid
            else:
                hi = mid
        lam0 = lo
    _, _, d2 = terms(lam0)
    if kappa0 >= 1.0 - 1e-12:
        return 0.0
    return float(min(1.0, d2 / (1.0 - kappa0)))
