"""Two-group mixture estimation under a monotone prior ordering.

Hypotheses arrive ranked, most promising first. The model gives hypothesis i
a null probability ``pi0[i]`` that is nondecreasing in the rank, a known null
p-value density ``f0`` (uniform by default), and a shared decreasing
alternative density ``f1``. Both unknowns are fit jointly by EM:

* E-step: posterior null probabilities ``Q[i]``.
* pi M-step: isotonic least-squares fit of ``Q`` (nondecreasing).
* f1 M-step: weighted Grenander fit, i.e. a decreasing step density maximizing
  the ``(1 - Q)``-weighted log-likelihood; solved by a second isotonic
  regression on transformed targets.

A Storey-style global null proportion calibrates the fitted ``pi0`` upward
when the EM estimate is less conservative than the global one.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import pava_fit
from .errors import DegenerateDataError, InputError
from .isotonic import grouped_pava

__all__ = [
    "EPS_PI",
    "EPS_Q",
    "EPS_P",
    "TestData",
    "StepDensity",
    "MixtureFit",
    "e_step",
    "m_step_pi",
    "m_step_f1",
    "log_likelihood",
    "storey_pi0",
    "calibrate_pi0",
    "em_fit",
    "em_fit_known_f1",
    "em_fit_binned",
]

# Clipping bounds keeping every quantity away from 0/1: fitted priors,
# posterior responsibilities, and ingested p-values.
EPS_PI = 1e-5
EPS_Q = 1e-10
EPS_P = 1e-15

STOREY_LAMBDAS = (0.5, 0.8)


@dataclass(frozen=True)
class TestData:
    """P-values in prior order (index 0 = most likely alternative).

    P-values are validated to [0, 1] and clipped to the open interval
    ``[EPS_P, 1 - EPS_P]`` on construction. ``truth`` (optional, simulation
    only) marks alternatives with True.
    """

    __test__ = False  # not a pytest case despite the name

    pvalues: np.ndarray
    order_source: str = "explicit"  # "explicit" | "covariate"
    truth: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.pvalues, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise InputError("pvalues must be a nonempty 1-D sequence")
        if not np.isfinite(p).all() or (p < 0).any() or (p > 1).any():
            raise InputError("pvalues must lie in [0, 1]")
        if self.order_source not in ("explicit", "covariate"):
            raise InputError(f"unknown order_source: {self.order_source!r}")
        object.__setattr__(self, "pvalues", np.clip(p, EPS_P, 1.0 - EPS_P))
        if self.truth is not None:
            t = np.asarray(self.truth, dtype=bool)
            if t.shape != p.shape:
                raise InputError("truth must match pvalues in length")
            object.__setattr__(self, "truth", t)

    @property
    def m(self) -> int:
        return self.pvalues.size


@dataclass(frozen=True)
class StepDensity:
    """Nonincreasing piecewise-constant density on [0, 1].

    ``heights[k]`` applies on ``(breakpoints[k-1], breakpoints[k]]`` with an
    implicit left edge at 0; ``tail_height`` applies on
    ``(breakpoints[-1], 1]``. Evaluation at 0 returns the first height.
    """

    breakpoints: np.ndarray
    heights: np.ndarray
    tail_height: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        h = np.asarray(self.heights, dtype=np.float64)
        if b.ndim != 1 or b.size == 0 or b.shape != h.shape:
            raise InputError("breakpoints and heights must be matching nonempty 1-D sequences")
        if (np.diff(b) <= 0).any() or b[0] <= 0 or b[-1] > 1:
            raise InputError("breakpoints must be strictly increasing within (0, 1]")
        if (h < 0).any() or (np.diff(h) > 1e-12).any() or self.tail_height < 0:
            raise InputError("heights must be nonnegative and nonincreasing")
        if self.tail_height > h[-1] + 1e-12:
            raise InputError("tail height must not exceed the last height")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "tail_height", float(self.tail_height))
        if abs(self.integral() - 1.0) > 1e-8:
            raise InputError(f"density must integrate to one, got {self.integral():.10f}")

    @classmethod
    def uniform(cls) -> "StepDensity":
        return cls(np.array([1.0]), np.array([1.0]), 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self.breakpoints, x, side="left")
        inside = idx < self.breakpoints.size
        out = np.where(inside, self.heights[np.minimum(idx, self.breakpoints.size - 1)], self.tail_height)
        return out if out.ndim else float(out)

    def integral(self) -> float:
        widths = np.diff(self.breakpoints, prepend=0.0)
        total = float(np.dot(self.heights, widths))
        return total + self.tail_height * (1.0 - float(self.breakpoints[-1]))


@dataclass(frozen=True)
class MixtureFit:
    """EM output: monotone prior fit, alternative density, calibrated prior.

    ``f1`` is the single fitted density; for binned fits it is None and
    ``f1_bins`` holds one density per contiguous rank bin bounded by
    ``bin_edges``.
    """

    pi0: np.ndarray
    pi0_calibrated: np.ndarray
    f1: StepDensity | None
    f1_bins: tuple[StepDensity, ...]
    bin_edges: np.ndarray
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    pi_global: float

    @property
    def m(self) -> int:
        return self.pi0.size

    def f1_at(self, pvalues) -> np.ndarray:
        """Per-hypothesis alternative density values (bin-aware).

        For a binned fit the p-values must be the full prior-ordered vector
        the fit was computed from (length ``m``); each rank bin is evaluated
        under its own density.
        """
        p = np.asarray(pvalues, dtype=np.float64)
        if len(self.f1_bins) == 1:
            return np.asarray(self.f1_bins[0](p))
        if p.size != self.m:
            raise InputError("binned fit requires the full prior-ordered p-value vector")
        out = np.empty_like(p)
        for k in range(len(self.f1_bins)):
            lo, hi = self.bin_edges[k], self.bin_edges[k + 1]
            out[lo:hi] = self.f1_bins[k](p[lo:hi])
        return out


def _f0_values(pvalues, f0):
    if f0 is None:
        return np.ones_like(pvalues)
    v = np.asarray(f0(pvalues), dtype=np.float64)
    if v.shape != pvalues.shape or not np.isfinite(v).all() or (v < 0).any():
        raise InputError("f0 hook must return finite nonnegative values, one per p-value")
    return v


def _f1_values(pvalues, f1):
    if isinstance(f1, StepDensity) or callable(f1):
        v = np.asarray(f1(pvalues), dtype=np.float64)
    else:
        v = np.asarray(f1, dtype=np.float64)
    if v.shape != pvalues.shape or not np.isfinite(v).all() or (v < 0).any():
        raise InputError("f1 must provide finite nonnegative values, one per p-value")
    return v


def e_step(pvalues, pi0, f1, f0=None):
    """Posterior null probabilities Q_i = pi_i f0 / (pi_i f0 + (1-pi_i) f1)."""
    p = np.asarray(pvalues, dtype=np.float64)
    pi = np.asarray(pi0, dtype=np.float64)
    if pi.shape != p.shape:
        raise InputError("pi0 must match pvalues in length")
    if (pi <= 0).any() or (pi >= 1).any():
        raise InputError("pi0 must lie strictly inside (0, 1)")
    num = pi * _f0_values(p, f0)
    den = num + (1.0 - pi) * _f1_values(p, f1)
    with np.errstate(invalid="ignore"):
        q = np.where(den > 0, num / den, 1.0)
    return np.clip(q, EPS_Q, 1.0 - EPS_Q)


def m_step_pi(q):
    """Nondecreasing isotonic fit of the posteriors, clipped to [EPS_PI, 1-EPS_PI]."""
    q = np.asarray(q, dtype=np.float64)
    fitted = pava_fit(q, np.ones_like(q), increasing=True)
    return np.clip(fitted, EPS_PI, 1.0 - EPS_PI)


def _grenander_heights(delta, w_u):
    """Decreasing-step-density heights from interval widths and tied weights.

    Solves the generalized isotonic problem of the weighted decreasing-density
    MLE: isotonic (nonincreasing) fit of targets ``-W * delta / w`` with
    weights ``w``, where ``W = sum(w)``; heights are the negative reciprocals.
    The resulting density integrates to one exactly by the pooling algebra.
    """
    total = w_u.sum()
    targets = -(total * delta) / w_u
    u = pava_fit(targets, w_u, increasing=False)
    return -1.0 / u


class _SortedLayout:
    """Sort/unique structure of a p-value block, reused across EM iterations."""

    def __init__(self, p):
        self.order = np.argsort(p, kind="stable")
        xs = p[self.order]
        self.xu, self.inv = np.unique(xs, return_inverse=True)
        if self.xu.size < 2:
            raise DegenerateDataError("all p-values identical; cannot form density intervals")
        self.delta = np.diff(self.xu, prepend=0.0)
        self.scatter = np.empty_like(self.order)
        self.scatter[self.order] = np.arange(self.order.size)

    def density(self, weights) -> tuple[StepDensity, np.ndarray]:
        """Fit the weighted Grenander step; returns it with per-point values."""
        w_u = np.bincount(self.inv, weights=weights[self.order], minlength=self.xu.size)
        heights = _grenander_heights(self.delta, w_u)
        per_point = heights[self.inv][self.scatter]
        return StepDensity(self.xu, heights, 0.0), per_point


def m_step_f1(pvalues, q) -> StepDensity:
    """Weighted Grenander update of the alternative density.

    Sorts the p-values, merges duplicates (summing their ``1 - Q`` weights),
    and fits the decreasing step density maximizing
    ``sum (1 - Q_i) log f1(x_i)``. The density is supported on
    ``(0, max(pvalues)]`` and integrates to one.
    """
    p = np.asarray(pvalues, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1 or p.size < 2:
        raise InputError("need at least two p-values with matching posteriors")
    if (q <= 0).any() or (q >= 1).any():
        raise InputError("posteriors must lie strictly inside (0, 1)")
    layout = _SortedLayout(p)
    density, _ = layout.density(1.0 - q)
    return density


def log_likelihood(pvalues, pi0, f1, f0=None) -> float:
    """Marginal log-likelihood sum_i log(pi_i f0(x_i) + (1-pi_i) f1(x_i))."""
    p = np.asarray(pvalues, dtype=np.float64)
    pi = np.asarray(pi0, dtype=np.float64)
    mix = pi * _f0_values(p, f0) + (1.0 - pi) * _f1_values(p, f1)
    return float(np.log(mix).sum())


def storey_pi0(pvalues) -> float:
    """Global null-proportion estimate: max over lambda in {0.5, 0.8}."""
    p = np.asarray(pvalues, dtype=np.float64)
    if p.size == 0:
        raise InputError("need at least one p-value")
    est = max(
        min(1.0, float(np.mean(p > lam)) / (1.0 - lam)) for lam in STOREY_LAMBDAS
    )
    return est


def calibrate_pi0(pi0, pi_global):
    """Shift the prior fit toward a global null-proportion estimate.

    With ``tilde = mean(pi0)``: if ``tilde >= pi_global`` the fit is already
    at least as conservative and is returned unchanged; otherwise every entry
    moves up by ``delta * (1 - pi0)`` with
    ``delta = (pi_global - tilde) / (1 - tilde)``, which preserves
    monotonicity and makes the calibrated mean match ``pi_global``.
    """
    pi = np.asarray(pi0, dtype=np.float64)
    if pi.ndim != 1 or pi.size == 0:
        raise InputError("pi0 must be a nonempty 1-D sequence")
    if (np.diff(pi) < 0).any():
        raise InputError("pi0 must be nondecreasing")
    if not 0.0 <= pi_global <= 1.0:
        raise InputError("pi_global must lie in [0, 1]")
    tilde = float(pi.mean())
    if tilde >= pi_global:
        return pi.copy()
    delta = (pi_global - tilde) / (1.0 - tilde)
    return pi + delta * (1.0 - pi)


def _bin_edges(m, num_bins):
    edges = np.floor(np.linspace(0, m, num_bins + 1)).astype(np.intp)
    return edges


def _em_core(data, f0, num_bins, group_ids, max_iter, tol, known_f1):
    p = data.pvalues
    m = p.size
    f0v = _f0_values(p, f0)

    if group_ids is not None:
        g = np.asarray(group_ids, dtype=np.intp)
        if g.shape != p.shape:
            raise InputError("group_ids must match pvalues in length")
        num_groups = int(g.max())
    edges = _bin_edges(m, num_bins)

    pi_global = storey_pi0(p)
    pi = np.full(m, np.clip(pi_global, EPS_PI, 1.0 - EPS_PI))

    if known_f1 is None:
        layouts = [_SortedLayout(p[edges[k]:edges[k + 1]]) for k in range(num_bins)]
        densities: list[StepDensity] = [None] * num_bins  # type: ignore[list-item]
        f1v = np.empty(m)
        uniform_q = np.full(m, 0.5)
        for k, layout in enumerate(layouts):
            lo, hi = edges[k], edges[k + 1]
            densities[k], f1v[lo:hi] = layout.density(1.0 - uniform_q[lo:hi])
    else:
        densities = [known_f1] if isinstance(known_f1, StepDensity) else []
        f1v = _f1_values(p, known_f1)

    ll = float(np.log(pi * f0v + (1.0 - pi) * f1v).sum())
    trace = [ll]
    converged = False
    iterations = 0
    unit_weights = np.ones(m)

    for iterations in range(1, max_iter + 1):
        num = pi * f0v
        q = num / (num + (1.0 - pi) * f1v)
        np.clip(q, EPS_Q, 1.0 - EPS_Q, out=q)

        if group_ids is None:
            pi = np.clip(pava_fit(q, unit_weights, increasing=True), EPS_PI, 1.0 - EPS_PI)
        else:
            gv = np.clip(grouped_pava(q, g, num_groups), EPS_PI, 1.0 - EPS_PI)
            pi = gv[g - 1]

        if known_f1 is None:
            w = 1.0 - q
            for k, layout in enumerate(layouts):
                lo, hi = edges[k], edges[k + 1]
                densities[k], f1v[lo:hi] = layout.density(w[lo:hi])

        ll_new = float(np.log(pi * f0v + (1.0 - pi) * f1v).sum())
        trace.append(ll_new)
        if abs(ll_new - ll) / (abs(ll_new) + 1.0) < tol:
            converged = True
            break
        ll = ll_new

    pi_cal = calibrate_pi0(pi, pi_global)
    single = densities[0] if (known_f1 is None and num_bins == 1) else None
    if known_f1 is not None and isinstance(known_f1, StepDensity):
        single = known_f1
    return MixtureFit(
        pi0=pi,
        pi0_calibrated=pi_cal,
        f1=single,
        f1_bins=tuple(densities) if known_f1 is None else ((single,) if single is not None else ()),
        bin_edges=edges,
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        pi_global=pi_global,
    )


def em_fit(data: TestData, *, f0=None, group_ids=None, max_iter=200, tol=1e-6) -> MixtureFit:
    """Fit the ordered two-group mixture by EM.

    Alternates the posterior E-step with the isotonic prior update and the
    weighted Grenander density update until the relative log-likelihood change
    drops below ``tol`` or ``max_iter`` is hit. ``group_ids`` (contiguous
    ordered ints 1..d aligned with the prior order) switches the prior update
    to group resolution, for hypotheses ordered only between groups.
    """
    if data.m < 10:
        raise InputError("need at least 10 p-values to fit the mixture")
    return _em_core(data, f0, 1, group_ids, max_iter, tol, known_f1=None)


def em_fit_known_f1(data: TestData, f1, *, f0=None, max_iter=200, tol=1e-6):
    """EM with the alternative density held fixed; returns the fitted prior.

    Only the monotone prior is updated, so this is the maximum-likelihood
    isotonic prior estimate under a known ``f1``. Works for any ``m >= 1``.
    """
    fit = _em_core(data, f0, 1, None, max_iter, tol, known_f1=f1)
    return fit.pi0


def em_fit_binned(data: TestData, num_bins: int, *, f0=None, group_ids=None, max_iter=200, tol=1e-6) -> MixtureFit:
    """EM variant estimating a separate alternative density per rank bin.

    The prior order is cut into ``num_bins`` consecutive bins of (nearly)
    equal size, each at least 50 hypotheses; ``num_bins=1`` reproduces
    :func:`em_fit` exactly.
    """
    if num_bins < 1:
        raise InputError("num_bins must be >= 1")
    if data.m < 10:
        raise InputError("need at least 10 p-values to fit the mixture")
    if data.m / num_bins < 50 and num_bins > 1:
        raise InputError(
            f"bin too small: m={data.m} with num_bins={num_bins} leaves fewer than 50 per bin"
        )
    return _em_core(data, f0, num_bins, group_ids, max_iter, tol, known_f1=None)
