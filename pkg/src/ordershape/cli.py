"""Command-line entry points.

``ordershape analyze`` runs one procedure on a TSV of p-values with an
optional ordering covariate and writes per-hypothesis decisions, estimates
and a JSON summary. ``ordershape simulate`` runs a scenario grid described by
a JSON config and writes the aggregated metrics CSV.

Exit codes: 0 success, 2 input error, 3 config error, 4 numerical failure.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .baselines import AccumulationKind, accumulation_test, adaptive_seqstep, bh, sabha_ordered, storey_bh
from .bench import METHOD_IDS, run_grid
from .errors import ConfigError, InputError
from .lfdr import lfdr_values, step_up
from .mixture import TestData, em_fit, em_fit_binned
from .simulate import ScenarioConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

ANALYZE_METHODS = (
    "ordershape",
    "bh",
    "st",
    "forwardstop",
    "seqstep",
    "hingeexp",
    "adaptive-seqstep",
    "sabha",
)


class NumericalError(RuntimeError):
    """Hard numerical failure (non-finite likelihood or scores)."""


def _read_table(path: Path, pvalue_col: str, covariate_col):
    """Parse the input TSV; returns (pvalues, covariate or None)."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot open input file: {exc}") from None
    with fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("empty input file") from None
        if len(set(header)) != len(header):
            dupes = sorted({c for c in header if header.count(c) > 1})
            raise InputError(f"duplicate column name(s) in header: {dupes}")
        if pvalue_col not in header:
            raise InputError(f"p-value column {pvalue_col!r} not found in header {header}")
        p_idx = header.index(pvalue_col)
        c_idx = None
        if covariate_col is not None:
            if covariate_col not in header:
                raise InputError(f"covariate column {covariate_col!r} not found in header {header}")
            c_idx = header.index(covariate_col)

        pvals, covs = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and row[0] == ""):
                continue
            if len(row) != len(header):
                raise InputError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
            cell = row[p_idx].strip()
            try:
                p = float(cell)
            except ValueError:
                raise InputError(
                    f"row {lineno}, column {pvalue_col!r}: unparsable p-value {cell!r}"
                ) from None
            if not np.isfinite(p) or not 0.0 <= p <= 1.0:
                raise InputError(f"row {lineno}, column {pvalue_col!r}: p-value {p!r} outside [0, 1]")
            pvals.append(p)
            if c_idx is not None:
                ccell = row[c_idx].strip()
                try:
                    covs.append(float(ccell))
                except ValueError:
                    raise InputError(
                        f"row {lineno}, column {covariate_col!r}: unparsable covariate {ccell!r}"
                    ) from None
        if not pvals:
            raise InputError("input file has a header but no data rows")
    p = np.asarray(pvals, dtype=np.float64)
    cov = np.asarray(covs, dtype=np.float64) if c_idx is not None else None
    return p, cov


def _read_groups(path: Path, n_rows: int) -> np.ndarray:
    """Group-id file: one integer per input row; ids 1..d, every group nonempty."""
    try:
        lines = Path(path).read_text(encoding="utf-8").split()
    except OSError as exc:
        raise InputError(f"cannot open groups file: {exc}") from None
    try:
        g = np.asarray([int(v) for v in lines], dtype=np.intp)
    except ValueError as exc:
        raise InputError(f"groups file: {exc}") from None
    if g.size != n_rows:
        raise InputError(f"groups file has {g.size} entries for {n_rows} data rows")
    d = int(g.max()) if g.size else 0
    if g.min() < 1 or (np.bincount(g - 1, minlength=d) == 0).any():
        raise InputError("group ids must cover 1..d with every group nonempty")
    return g


def _run_analysis_method(method, p_ordered, alpha, order_source, bins, group_ids):
    """Dispatch; returns (DecisionResult, MixtureFit or None)."""
    if method == "ordershape":
        data = TestData(p_ordered, order_source=order_source)
        if bins > 1:
            fit = em_fit_binned(data, bins, group_ids=group_ids)
        else:
            fit = em_fit(data, group_ids=group_ids)
        if not np.isfinite(fit.loglik_trace).all():
            raise NumericalError("EM log-likelihood became non-finite; no outputs written")
        if not fit.converged:
            # The fit is still valid (likelihood ascent holds); record the flag.
            print(
                f"warning: EM stopped at the {fit.iterations}-iteration cap before "
                "meeting the tolerance; see summary.json",
                file=sys.stderr,
            )
        scores = lfdr_values(data.pvalues, fit.pi0_calibrated, fit.f1_at(data.pvalues))
        if not np.isfinite(scores).all():
            raise NumericalError("non-finite local-fdr scores; no outputs written")
        return step_up(scores, alpha, method="ordershape"), fit
    if method == "bh":
        return bh(p_ordered, alpha), None
    if method == "st":
        return storey_bh(p_ordered, alpha), None
    if method in ("forwardstop", "seqstep", "hingeexp"):
        return accumulation_test(p_ordered, AccumulationKind(method), alpha), None
    if method == "adaptive-seqstep":
        return adaptive_seqstep(p_ordered, alpha), None
    if method == "sabha":
        return sabha_ordered(p_ordered, alpha), None
    raise ConfigError(f"method: unknown method id {method!r}")


def _write_density_tsv(path: Path, density) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("interval_end\theight\n")
        for b, h in zip(density.breakpoints, density.heights):
            fh.write(f"{b:.17g}\t{h:.17g}\n")
        if density.breakpoints[-1] < 1.0:
            fh.write(f"1\t{density.tail_height:.17g}\n")


def cmd_analyze(args) -> None:
    if not 0.0 < args.alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {args.alpha!r}")
    if args.bins < 1:
        raise ConfigError(f"bins: must be >= 1, got {args.bins!r}")
    if args.covariate_col is not None and args.groups is not None:
        raise InputError("--covariate-col and --groups are mutually exclusive orderings")

    p, cov = _read_table(Path(args.input), args.pvalue_col, args.covariate_col)
    m = p.size

    group_ids_ordered = None
    if args.groups is not None:
        g = _read_groups(Path(args.groups), m)
        order = np.argsort(g, kind="stable")
        group_ids_ordered = g[order]
        order_source = "covariate"
    elif cov is not None:
        key = cov if args.covariate_direction == "ascending" else -cov
        order = np.argsort(key, kind="stable")
        order_source = "covariate"
    else:
        order = np.arange(m)
        order_source = "explicit"

    p_ordered = p[order]
    decision, fit = _run_analysis_method(
        args.method, p_ordered, args.alpha, order_source, args.bins, group_ids_ordered
    )

    rank_of_row = np.empty(m, dtype=np.intp)
    rank_of_row[order] = np.arange(1, m + 1)
    score_by_row = np.empty(m)
    score_by_row[order] = decision.scores
    rejected_by_row = np.zeros(m, dtype=bool)
    rejected_by_row[order] = decision.rejected

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        dec_path = outdir / "decisions.tsv"
        with open(dec_path, "w", encoding="utf-8") as fh:
            fh.write("row_id\tpvalue\tcovariate\trank\tscore\trejected\n")
            for j in range(m):
                cov_cell = f"{cov[j]:.17g}" if cov is not None else ""
                fh.write(
                    f"{j + 1}\t{p[j]:.17g}\t{cov_cell}\t{rank_of_row[j]}\t"
                    f"{score_by_row[j]:.17g}\t{int(rejected_by_row[j])}\n"
                )
        written.append(dec_path)

        em_info = None
        if fit is not None:
            est_path = outdir / "estimates.tsv"
            with open(est_path, "w", encoding="utf-8") as fh:
                fh.write("rank\tpi0\tpi0_calibrated\n")
                for i in range(m):
                    fh.write(f"{i + 1}\t{fit.pi0[i]:.17g}\t{fit.pi0_calibrated[i]:.17g}\n")
            written.append(est_path)
            if len(fit.f1_bins) == 1:
                f1_path = outdir / "f1_density.tsv"
                _write_density_tsv(f1_path, fit.f1_bins[0])
                written.append(f1_path)
            else:
                for k, dens in enumerate(fit.f1_bins):
                    f1_path = outdir / f"f1_density_bin{k + 1:02d}.tsv"
                    _write_density_tsv(f1_path, dens)
                    written.append(f1_path)
            em_info = {
                "iterations": fit.iterations,
                "converged": fit.converged,
                "loglik": float(fit.loglik_trace[-1]),
                "storey_pi0": fit.pi_global,
                "bins": len(fit.f1_bins),
            }

        summary = {
            "method": args.method,
            "alpha": args.alpha,
            "m": m,
            "rejections": decision.k_hat,
            "threshold": decision.threshold,
            "seed": args.seed,
            "input": str(args.input),
            "pvalue_col": args.pvalue_col,
            "covariate_col": args.covariate_col,
            "covariate_direction": args.covariate_direction,
            "em": em_info,
        }
        sum_path = outdir / "summary.json"
        with open(sum_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        written.append(sum_path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    print(f"{args.method}: rejected {decision.k_hat} of {m} at alpha={args.alpha:g} -> {outdir}")


def _parse_sim_config(path: Path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot open config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    known = {"alpha", "reps", "master_seed", "methods", "scenarios"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    for key in ("alpha", "reps", "methods", "scenarios"):
        if key not in raw:
            raise ConfigError(f"config: missing required field {key!r}")
    alpha = raw["alpha"]
    if not isinstance(alpha, (int, float)) or not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {alpha!r}")
    reps = raw["reps"]
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError(f"reps: must be a positive integer, got {reps!r}")
    master_seed = raw.get("master_seed", 0)
    if not isinstance(master_seed, int) or master_seed < 0:
        raise ConfigError(f"master_seed: must be a nonnegative integer, got {master_seed!r}")
    methods = raw["methods"]
    if not isinstance(methods, list) or not methods:
        raise ConfigError("methods: must be a nonempty list of method ids")
    for name in methods:
        if name not in METHOD_IDS:
            raise ConfigError(f"methods: unknown method id {name!r}; known: {METHOD_IDS}")
    scenarios_raw = raw["scenarios"]
    if not isinstance(scenarios_raw, list) or not scenarios_raw:
        raise ConfigError("scenarios: must be a nonempty list of scenario objects")
    scenarios = []
    for i, sc in enumerate(scenarios_raw):
        if not isinstance(sc, dict):
            raise ConfigError(f"scenarios[{i}]: must be an object")
        try:
            scenarios.append(ScenarioConfig.from_dict(sc))
        except (ConfigError, TypeError) as exc:
            raise ConfigError(f"scenarios[{i}]: {exc}") from None
    return {
        "alpha": float(alpha),
        "reps": reps,
        "master_seed": master_seed,
        "methods": methods,
        "scenarios": scenarios,
    }


def cmd_simulate(args) -> None:
    cfg = _parse_sim_config(Path(args.config))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    result = run_grid(
        cfg["scenarios"],
        cfg["methods"],
        cfg["reps"],
        cfg["alpha"],
        master_seed=cfg["master_seed"],
        n_jobs=os.cpu_count() or 1,
    )
    out_path = outdir / "metrics.csv"
    result.write_csv(out_path)
    print(
        f"wrote {len(result.rows)} rows ({len(cfg['scenarios'])} scenarios x "
        f"{len(cfg['methods'])} methods, {cfg['reps']} reps) -> {out_path}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordershape", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run one FDR procedure on a TSV of p-values")
    pa.add_argument("--input", required=True, help="TSV file with a header row")
    pa.add_argument("--pvalue-col", required=True, help="name of the p-value column")
    pa.add_argument("--covariate-col", default=None, help="ordering covariate column (default: file order)")
    pa.add_argument(
        "--covariate-direction",
        choices=("ascending", "descending"),
        default="ascending",
        help="ascending = smallest covariate is most promising (default)",
    )
    pa.add_argument("--method", choices=ANALYZE_METHODS, default="ordershape")
    pa.add_argument("--alpha", type=float, default=0.05)
    pa.add_argument("--bins", type=int, default=1, help="rank bins for a bin-wise alternative density")
    pa.add_argument("--groups", default=None, help="file with one group id per row (grouped ordering)")
    pa.add_argument("--out", required=True, help="output directory")
    pa.add_argument("--seed", type=int, default=0, help="recorded in summary.json (procedures are deterministic)")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="run a scenario grid from a JSON config")
    ps.add_argument("--config", required=True, help="JSON config: alpha, reps, master_seed, methods, scenarios")
    ps.add_argument("--out", required=True, help="output directory for metrics.csv")
    ps.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
