"""Experiment harness: run procedures over a scenario grid, tabulate FDR/power.

Each replicate draws one dataset per scenario, runs every requested method on
it, and records the realized false discovery proportion, power, rejection
count and runtime. Aggregation reports means with 95% normal-approximation
confidence intervals. A fixed master seed pins the whole table bit-for-bit:
replicate seeds derive from (master seed, scenario seed, replicate index), so
results do not depend on grid order or on which methods run.
"""

import csv
import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import (
    AccumulationKind,
    accumulation_test,
    adaptive_seqstep,
    bh,
    sabha_ordered,
    storey_bh,
)
from .errors import ConfigError
from .lfdr import DecisionResult, lfdr_values, step_up
from .mixture import em_fit
from .simulate import (
    ScenarioConfig,
    SimulatedData,
    gaussian_alternative_density,
    simulate_scenario,
)

__all__ = ["ReplicateMetrics", "GridResult", "fdp_and_power", "run_method", "run_grid", "METHOD_IDS"]

METHOD_IDS = (
    "ordershape",
    "bh",
    "st",
    "forwardstop",
    "seqstep",
    "hingeexp",
    "adaptive-seqstep",
    "sabha",
    "oracle-lfdr",
)

_SCENARIO_FIELDS = [f.name for f in dataclasses.fields(ScenarioConfig)]

CSV_COLUMNS = _SCENARIO_FIELDS + [
    "method",
    "mean_fdr",
    "fdr_ci_lo",
    "fdr_ci_hi",
    "mean_power",
    "power_ci_lo",
    "power_ci_hi",
    "reps",
    "failures",
    "mean_runtime_ms",
]


@dataclass(frozen=True)
class ReplicateMetrics:
    """Outcome of one method on one replicate."""

    scenario: str
    method: str
    rep: int
    fdp: float
    power: float
    rejections: int
    runtime_ms: float


@dataclass(frozen=True)
class GridResult:
    """Aggregated rows (one per scenario-method pair) plus raw replicates."""

    rows: list
    replicates: list

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(self.rows)


def fdp_and_power(decision: DecisionResult, truth):
    """Realized (false discovery proportion, power) against truth labels.

    fdp = #(rejected and null) / max(#rejected, 1);
    power = #(rejected and alternative) / max(#alternatives, 1), so both are
    defined (as 0) with no rejections or no alternatives.
    """
    t = np.asarray(truth, dtype=bool)
    r = np.asarray(decision.rejected, dtype=bool)
    if t.shape != r.shape:
        raise ConfigError("truth length does not match the decision vector")
    n_rej = int(r.sum())
    false_rej = int((r & ~t).sum())
    true_rej = n_rej - false_rej
    n_alt = int(t.sum())
    return false_rej / max(n_rej, 1), true_rej / max(n_alt, 1)


def run_method(name: str, sim: SimulatedData, alpha: float) -> DecisionResult:
    """Run one procedure on a simulated dataset (p-values in prior order)."""
    p = sim.pvalues
    if name == "ordershape":
        fit = em_fit(sim.data)
        scores = lfdr_values(p, fit.pi0_calibrated, fit.f1_at(p))
        return step_up(scores, alpha, method="ordershape")
    if name == "bh":
        return bh(p, alpha)
    if name == "st":
        return storey_bh(p, alpha)
    if name in ("forwardstop", "seqstep", "hingeexp"):
        return accumulation_test(p, AccumulationKind(name), alpha)
    if name == "adaptive-seqstep":
        return adaptive_seqstep(p, alpha)
    if name == "sabha":
        return sabha_ordered(p, alpha)
    if name == "oracle-lfdr":
        # true priors and true alternative density; the benchmark yardstick
        f1v = gaussian_alternative_density(p, sim.config.ks)
        pi_true = np.clip(sim.pi0_true, 1e-12, 1.0)
        scores = lfdr_values(p, pi_true, f1v)
        return step_up(scores, alpha, method="oracle-lfdr")
    raise ConfigError(f"methods: unknown method id {name!r}; known: {METHOD_IDS}")


def _mean_ci(values):
    """Mean and 95% normal-approximation CI; degenerate (zero-width) for n < 2."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("nan"), float("nan")
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, mean, mean
    se = float(arr.std(ddof=1)) / np.sqrt(arr.size)
    return mean, mean - 1.96 * se, mean + 1.96 * se


def _run_replicate(payload):
    """One replicate of one scenario: every method on the same dataset.

    Returns (method, fdp, power, rejections, runtime_ms) tuples with None
    metrics for methods that failed. Module-level so it pickles for the
    process pool.
    """
    cfg_dict, methods, alpha, master_seed, rep = payload
    cfg = ScenarioConfig(**cfg_dict)
    sim = simulate_scenario(cfg, seed=np.random.SeedSequence([master_seed, cfg.seed, rep]))
    out = []
    for name in methods:
        t0 = time.perf_counter()
        try:
            decision = run_method(name, sim, alpha)
        except Exception:
            out.append((name, None, None, None, None))
            continue
        runtime_ms = (time.perf_counter() - t0) * 1e3
        fdp, power = fdp_and_power(decision, sim.truth)
        out.append((name, fdp, power, decision.k_hat, runtime_ms))
    return out


def run_grid(grid, methods, reps, alpha, master_seed=0, n_jobs=1) -> GridResult:
    """Run all methods over all scenarios for ``reps`` replicates each.

    A method failure on a replicate is recorded and that replicate is excluded
    from the method's aggregates (the ``failures`` column counts them); other
    methods keep the replicate. Returns aggregate rows in grid-then-method
    order plus the per-replicate records.

    ``n_jobs`` > 1 distributes replicates over worker processes; replicate
    seeds are fixed up front and results are reduced in submission order, so
    the aggregates match the sequential run (runtimes aside).
    """
    if reps < 1:
        raise ConfigError(f"reps: must be >= 1, got {reps!r}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {alpha!r}")
    if int(master_seed) < 0:
        raise ConfigError(f"master_seed: must be nonnegative, got {master_seed!r}")
    grid = [cfg.validate() for cfg in grid]
    methods = list(methods)
    for name in methods:
        if name not in METHOD_IDS:
            raise ConfigError(f"methods: unknown method id {name!r}; known: {METHOD_IDS}")

    replicates: list[ReplicateMetrics] = []
    rows: list[dict] = []
    for cfg in grid:
        label = cfg.label()
        per_method = {name: {"fdp": [], "power": [], "ms": [], "failures": 0} for name in methods}
        payloads = [(cfg.to_dict(), methods, alpha, int(master_seed), rep) for rep in range(reps)]
        if n_jobs and n_jobs > 1:
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                outcomes = list(pool.map(_run_replicate, payloads, chunksize=4))
        else:
            outcomes = [_run_replicate(p) for p in payloads]
        for rep, outcome in enumerate(outcomes):
            for name, fdp, power, rejections, runtime_ms in outcome:
                if fdp is None:
                    per_method[name]["failures"] += 1
                    continue
                per_method[name]["fdp"].append(fdp)
                per_method[name]["power"].append(power)
                per_method[name]["ms"].append(runtime_ms)
                replicates.append(
                    ReplicateMetrics(label, name, rep, fdp, power, rejections, runtime_ms)
                )
        for name in methods:
            acc = per_method[name]
            fdr, fdr_lo, fdr_hi = _mean_ci(acc["fdp"])
            pw, pw_lo, pw_hi = _mean_ci(acc["power"])
            row = cfg.to_dict()
            row.update(
                method=name,
                mean_fdr=fdr,
                fdr_ci_lo=fdr_lo,
                fdr_ci_hi=fdr_hi,
                mean_power=pw,
                power_ci_lo=pw_lo,
                power_ci_hi=pw_hi,
                reps=len(acc["fdp"]),
                failures=acc["failures"],
                mean_runtime_ms=float(np.mean(acc["ms"])) if acc["ms"] else float("nan"),
            )
            rows.append(row)
    return GridResult(rows=rows, replicates=replicates)
