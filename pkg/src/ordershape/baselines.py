"""Comparator procedures: classical and order-aware FDR rules.

BH and Storey-BH ignore the prior order. The accumulation tests (ForwardStop,
SeqStep, HingeExp) walk down the ranked list and reject an initial block;
Adaptive SeqStep additionally thins the block by a p-value cutoff; the ordered
SABHA variant reweights p-values by an isotonic estimate of the local null
proportion built from censored p-values, then applies BH.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import pava_fit
from .errors import InputError
from .lfdr import DecisionResult
from .mixture import storey_pi0

__all__ = [
    "AccumulationKind",
    "bh",
    "storey_bh",
    "accumulation_test",
    "adaptive_seqstep",
    "sabha_ordered",
]

ACCUMULATION_NAMES = ("forwardstop", "seqstep", "hingeexp")


@dataclass(frozen=True)
class AccumulationKind:
    """Accumulation function h~ applied to ranked p-values.

    Each kind integrates to one over [0, 1]: ForwardStop uses
    ``log(1/(1-x))``; SeqStep(C) uses ``C * 1{x > 1 - 1/C}``; HingeExp(C) uses
    ``C * log(1/(C(1-x))) * 1{x > 1 - 1/C}``. ``c`` must exceed 1 so the
    indicator knee ``1 - 1/C`` lies inside (0, 1).
    """

    name: str
    c: float = 2.0

    def __post_init__(self):
        if self.name not in ACCUMULATION_NAMES:
            raise InputError(f"unknown accumulation kind: {self.name!r}")
        if self.name in ("seqstep", "hingeexp") and not self.c > 1.0:
            raise InputError("C must be > 1 for SeqStep/HingeExp")

    def h_tilde(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.name == "forwardstop":
            return -np.log1p(-x)
        knee = x > 1.0 - 1.0 / self.c
        if self.name == "seqstep":
            return np.where(knee, self.c, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = -self.c * np.log(self.c * (1.0 - x))
        return np.where(knee, vals, 0.0)


def _check_pvalues(pvalues):
    p = np.asarray(pvalues, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InputError("pvalues must be a nonempty 1-D sequence")
    if not np.isfinite(p).all() or (p < 0).any() or (p > 1).any():
        raise InputError("pvalues must lie in [0, 1]")
    return p


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    return float(alpha)


def _bh_core(values, level, alpha, method):
    """Step-up on sorted values against thresholds i * level / m."""
    m = values.size
    order = np.sort(values)
    thresholds = level * np.arange(1, m + 1) / m
    passing = np.flatnonzero(order <= thresholds)
    if passing.size == 0:
        return DecisionResult(values, np.zeros(m, dtype=bool), 0.0, 0, alpha, method)
    cutoff = float(order[passing[-1]])
    rejected = values <= cutoff
    return DecisionResult(values, rejected, cutoff, int(rejected.sum()), alpha, method)


def bh(pvalues, alpha) -> DecisionResult:
    """Benjamini-Hochberg: reject all p-values at or below the largest
    order statistic p_(k) satisfying p_(k) <= k * alpha / m."""
    p = _check_pvalues(pvalues)
    return _bh_core(p, _check_alpha(alpha), alpha, "bh")


def storey_bh(pvalues, alpha) -> DecisionResult:
    """BH at level alpha / pi0_hat with the Storey global null proportion.

    A zero estimate (no p-value above either Storey lambda) makes the level
    unbounded, which rejects everything.
    """
    p = _check_pvalues(pvalues)
    a = _check_alpha(alpha)
    pi0 = storey_pi0(p)
    level = a / pi0 if pi0 > 0 else np.inf
    return _bh_core(p, level, alpha, "storey-bh")


def accumulation_test(pvalues, kind: AccumulationKind, alpha) -> DecisionResult:
    """Reject the longest initial block of the ranked list whose running mean
    of accumulated values h~(p_i) stays at or below alpha.

    ``scores`` holds the running means (the estimated FDP bound after each
    prefix); ``threshold`` is the bound achieved at the chosen block length.
    """
    p = _check_pvalues(pvalues)
    a = _check_alpha(alpha)
    h = kind.h_tilde(p)
    means = np.cumsum(h) / np.arange(1, p.size + 1)
    scores = np.clip(means, 0.0, 1.0)
    passing = np.flatnonzero(means <= a)
    k = int(passing[-1]) + 1 if passing.size else 0
    rejected = np.zeros(p.size, dtype=bool)
    rejected[:k] = True
    threshold = float(means[k - 1]) if k else 0.0
    return DecisionResult(scores, rejected, threshold, k, a, kind.name)


def adaptive_seqstep(pvalues, alpha, s=None, lam=None) -> DecisionResult:
    """Adaptive SeqStep on a ranked list.

    Within the first k hypotheses, p-values above ``lam`` estimate the null
    mass and p-values at or below ``s`` are the candidate rejections; the FDP
    estimate is ``[s / (1 - lam)] * (1 + #{p > lam}) / max(1, #{p <= s})``.
    The rule takes the largest k keeping the estimate at or below alpha and
    rejects the candidates in that prefix. Defaults: ``s = lam = alpha``.
    """
    p = _check_pvalues(pvalues)
    a = _check_alpha(alpha)
    if s is None:
        s = a
    if lam is None:
        lam = max(s, a)
    if not 0.0 < s <= lam < 1.0:
        raise InputError("need 0 < s <= lam < 1")
    above = np.cumsum(p > lam)
    candidates = p <= s
    below = np.cumsum(candidates)
    fdp_hat = (s / (1.0 - lam)) * (1.0 + above) / np.maximum(below, 1)
    scores = np.clip(fdp_hat, 0.0, 1.0)
    passing = np.flatnonzero(fdp_hat <= a)
    k = int(passing[-1]) + 1 if passing.size else 0
    rejected = candidates.copy()
    rejected[k:] = False
    return DecisionResult(scores, rejected, float(s), int(rejected.sum()), a, "adaptive-seqstep")


def sabha_ordered(pvalues, alpha, tau=0.5, clip_floor=0.1) -> DecisionResult:
    """Ordered SABHA variant: BH on isotonically reweighted p-values.

    The local null proportion along the ranking is estimated by an isotonic
    (nondecreasing) fit of the censoring indicators ``1{p > tau} / (1 - tau)``,
    clipped to ``[clip_floor, 1]``; BH then runs on ``q_hat * p`` at level
    alpha. With all weights at 1 this is exactly BH.
    """
    p = _check_pvalues(pvalues)
    a = _check_alpha(alpha)
    if not 0.0 < tau < 1.0:
        raise InputError("tau must lie in (0, 1)")
    censored = (p > tau) / (1.0 - tau)
    q_hat = np.clip(pava_fit(censored, np.ones_like(p), increasing=True), clip_floor, 1.0)
    return _bh_core(q_hat * p, a, a, "sabha")
