"""CLI: file IO contracts, exit codes, output layout, determinism."""

import csv
import json

import numpy as np
import pytest

from ordershape.cli import main


def write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(v) for v in row) + "\n")


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.tsv"
    pvals = [0.001, 0.002, 0.003, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
    write_tsv(path, ["snp", "pval"], [[f"rs{i}", p] for i, p in enumerate(pvals)])
    return path


def read_decisions(outdir):
    with open(outdir / "decisions.tsv", encoding="utf-8") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


class TestAnalyzeBH:
    def test_hand_run_bh_count(self, toy_file, tmp_path):
        out = tmp_path / "out"
        code = main([
            "analyze", "--input", str(toy_file), "--pvalue-col", "pval",
            "--method", "bh", "--alpha", "0.05", "--out", str(out),
        ])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["rejections"] == 3  # thresholds i*0.005 pass up to p=(3)
        rows = read_decisions(out)
        assert [r["rejected"] for r in rows] == ["1", "1", "1"] + ["0"] * 7

    def test_rank_defaults_to_file_order(self, toy_file, tmp_path):
        out = tmp_path / "out"
        main(["analyze", "--input", str(toy_file), "--pvalue-col", "pval",
              "--method", "bh", "--out", str(out)])
        rows = read_decisions(out)
        assert [int(r["rank"]) for r in rows] == list(range(1, 11))
        assert all(r["covariate"] == "" for r in rows)

    def test_no_estimates_for_plain_bh(self, toy_file, tmp_path):
        out = tmp_path / "out"
        main(["analyze", "--input", str(toy_file), "--pvalue-col", "pval",
              "--method", "bh", "--out", str(out)])
        assert not (out / "estimates.tsv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["em"] is None


class TestAnalyzeOrdered:
    def _write_dataset(self, path, rng, m=800):
        # covariate correlates with signal: smaller cov -> more likely alternative
        cov = np.sort(rng.uniform(size=m))
        theta = rng.random(m) < np.clip(0.5 - cov, 0.02, 1)
        z = rng.standard_normal(m) + 3.0 * theta
        from scipy.special import ndtr

        p = ndtr(-z)
        rows = list(zip((f"g{i}" for i in range(m)), p, cov))
        perm = rng.permutation(m)
        write_tsv(path, ["gene", "p", "score"], [rows[i] for i in perm])
        return path

    def test_ordershape_end_to_end(self, tmp_path):
        rng = np.random.default_rng(80)
        data = self._write_dataset(tmp_path / "d.tsv", rng)
        out = tmp_path / "out"
        code = main(["analyze", "--input", str(data), "--pvalue-col", "p",
                     "--covariate-col", "score", "--method", "ordershape",
                     "--alpha", "0.1", "--out", str(out)])
        assert code == 0
        assert (out / "estimates.tsv").exists()
        assert (out / "f1_density.tsv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["em"] is not None
        with open(out / "estimates.tsv", encoding="utf-8") as fh:
            est = list(csv.DictReader(fh, delimiter="\t"))
        pi0 = np.array([float(r["pi0"]) for r in est])
        assert (np.diff(pi0) >= -1e-12).all()

    def test_order_stable_under_row_permutation(self, tmp_path):
        rng = np.random.default_rng(81)
        m = 400
        cov = rng.uniform(size=m)
        p = rng.uniform(size=m) ** 2
        rows = [[f"id{i}", p[i], cov[i]] for i in range(m)]
        f1, f2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
        write_tsv(f1, ["id", "p", "c"], rows)
        perm = rng.permutation(m)
        write_tsv(f2, ["id", "p", "c"], [rows[i] for i in perm])
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        for f, o in ((f1, out1), (f2, out2)):
            assert main(["analyze", "--input", str(f), "--pvalue-col", "p",
                         "--covariate-col", "c", "--method", "sabha", "--out", str(o)]) == 0
        by_id_1 = {r["row_id"]: r for r in read_decisions(out1)}
        # map original row ids through the permutation
        d2 = read_decisions(out2)
        for new_row, orig_idx in enumerate(perm):
            r1 = by_id_1[str(orig_idx + 1)]
            r2 = d2[new_row]
            assert r1["rejected"] == r2["rejected"]
            assert r1["score"] == r2["score"]

    def test_covariate_direction_descending(self, tmp_path):
        path = tmp_path / "d.tsv"
        write_tsv(path, ["p", "c"], [[0.5, 1.0], [0.01, 3.0], [0.9, 2.0]])
        out = tmp_path / "out"
        main(["analyze", "--input", str(path), "--pvalue-col", "p", "--covariate-col", "c",
              "--covariate-direction", "descending", "--method", "seqstep", "--out", str(out)])
        rows = read_decisions(out)
        assert [int(r["rank"]) for r in rows] == [3, 1, 2]

    def test_groups_file(self, tmp_path):
        rng = np.random.default_rng(82)
        m = 200
        p = np.concatenate([rng.uniform(0, 0.02, 40), rng.uniform(size=m - 40)])
        write_tsv(tmp_path / "d.tsv", ["p"], [[v] for v in p])
        (tmp_path / "groups.txt").write_text("\n".join(["1"] * 100 + ["2"] * 100) + "\n")
        out = tmp_path / "out"
        code = main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--groups", str(tmp_path / "groups.txt"), "--method", "ordershape",
                     "--out", str(out)])
        assert code == 0
        with open(out / "estimates.tsv", encoding="utf-8") as fh:
            est = list(csv.DictReader(fh, delimiter="\t"))
        pi0 = np.array([float(r["pi0"]) for r in est])
        assert np.unique(pi0[:100]).size == 1 and np.unique(pi0[100:]).size == 1

    def test_bins_write_per_bin_sidecars(self, tmp_path):
        rng = np.random.default_rng(83)
        p = rng.uniform(size=300)
        write_tsv(tmp_path / "d.tsv", ["p"], [[v] for v in p])
        out = tmp_path / "out"
        code = main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--method", "ordershape", "--bins", "3", "--out", str(out)])
        assert code == 0
        for k in (1, 2, 3):
            assert (out / f"f1_density_bin{k:02d}.tsv").exists()


class TestAnalyzeGlobalNull:
    def test_near_zero_rejections_on_uniform_pvalues(self, tmp_path):
        m = 5000
        worst = 0
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            path = tmp_path / f"null{seed}.tsv"
            write_tsv(path, ["p"], [[v] for v in rng.uniform(size=m)])
            out = tmp_path / f"out{seed}"
            code = main(["analyze", "--input", str(path), "--pvalue-col", "p",
                         "--method", "ordershape", "--alpha", "0.05", "--out", str(out)])
            assert code == 0
            rejections = json.loads((out / "summary.json").read_text())["rejections"]
            worst = max(worst, rejections)
        assert worst <= 0.001 * m


class TestAnalyzeErrors:
    def test_missing_file(self, tmp_path):
        assert main(["analyze", "--input", str(tmp_path / "nope.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")]) == 2

    def test_empty_file(self, tmp_path):
        (tmp_path / "e.tsv").write_text("")
        assert main(["analyze", "--input", str(tmp_path / "e.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")]) == 2

    def test_duplicate_columns(self, tmp_path):
        (tmp_path / "d.tsv").write_text("p\tp\n0.1\t0.2\n")
        assert main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")]) == 2

    def test_unparsable_pvalue_reports_row_and_column(self, tmp_path, capsys):
        (tmp_path / "d.tsv").write_text("p\n0.1\nzero.two\n")
        code = main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")])
        assert code == 2
        err = capsys.readouterr().err
        assert "row 3" in err and "'p'" in err

    def test_out_of_range_pvalue(self, tmp_path):
        (tmp_path / "d.tsv").write_text("p\n0.1\n1.5\n")
        assert main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")]) == 2

    def test_missing_column(self, tmp_path):
        (tmp_path / "d.tsv").write_text("q\n0.1\n")
        assert main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
                     "--out", str(tmp_path / "o")]) == 2

    def test_bad_alpha_is_config_error(self, toy_file, tmp_path):
        assert main(["analyze", "--input", str(toy_file), "--pvalue-col", "pval",
                     "--alpha", "1.5", "--out", str(tmp_path / "o")]) == 3

    def test_unknown_method_usage_error(self, toy_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--input", str(toy_file), "--pvalue-col", "pval",
                  "--method", "qvalue", "--out", str(tmp_path / "o")])
        assert exc.value.code == 2

    def test_no_outputs_on_input_error(self, tmp_path):
        (tmp_path / "d.tsv").write_text("p\n0.1\nbad\n")
        out = tmp_path / "o"
        main(["analyze", "--input", str(tmp_path / "d.tsv"), "--pvalue-col", "p",
              "--out", str(out)])
        assert not (out / "decisions.tsv").exists()


class TestSimulateCommand:
    def _config(self, tmp_path, **overrides):
        cfg = {
            "alpha": 0.05,
            "reps": 2,
            "master_seed": 5,
            "methods": ["bh"],
            "scenarios": [
                {"m": 400, "informativeness": "high", "density_target": 0.2, "ks": 3.0, "seed": 1}
            ],
        }
        cfg.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_minimal_config_one_row_csv(self, tmp_path):
        path = self._config(tmp_path)
        out = tmp_path / "res"
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        with open(out / "metrics.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert rows[0]["method"] == "bh"
        assert rows[0]["reps"] == "2"

    def test_invalid_density_target_names_field(self, tmp_path, capsys):
        path = self._config(
            tmp_path,
            scenarios=[{"m": 400, "informativeness": "high", "density_target": 1.5}],
        )
        code = main(["simulate", "--config", str(path), "--out", str(tmp_path / "res")])
        assert code == 3
        assert "density_target" in capsys.readouterr().err

    def test_missing_field(self, tmp_path, capsys):
        cfg = {"reps": 2, "methods": ["bh"], "scenarios": [{"m": 100}]}
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "res")]) == 3
        assert "alpha" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "res")]) == 3

    def test_unknown_method_in_config(self, tmp_path, capsys):
        path = self._config(tmp_path, methods=["qvalue"])
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "res")]) == 3
        assert "qvalue" in capsys.readouterr().err

    def test_deterministic_metrics(self, tmp_path):
        path = self._config(tmp_path)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["simulate", "--config", str(path), "--out", str(out1)])
        main(["simulate", "--config", str(path), "--out", str(out2)])

        def stable_part(p):
            with open(p, newline="") as fh:
                return [
                    {k: v for k, v in row.items() if k != "mean_runtime_ms"}
                    for row in csv.DictReader(fh)
                ]

        assert stable_part(out1 / "metrics.csv") == stable_part(out2 / "metrics.csv")


class TestShippedConfigs:
    def test_main_grid_has_27_scenarios(self):
        from pathlib import Path

        cfg = json.loads(Path(__file__).resolve().parents[1].joinpath(
            "configs", "main_grid.json").read_text())
        assert len(cfg["scenarios"]) == 27
        cells = {(s["informativeness"], s["density_target"], s["ks"]) for s in cfg["scenarios"]}
        assert len(cells) == 27

    def test_quick_config_runs(self, tmp_path):
        from pathlib import Path

        cfg_path = Path(__file__).resolve().parents[1] / "configs" / "quick.json"
        out = tmp_path / "res"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "metrics.csv").exists()
