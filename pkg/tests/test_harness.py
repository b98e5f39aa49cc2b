from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from mdlest.errors import ConfigError
from mdlest.harness import (
    emit_csv,
    load_config,
    parse_csv,
    run_cs_experiment,
    run_denoise_experiment,
    run_lossy_experiment,
    run_oracle_suite,
)
from mdlest.harness.config import from_dict


def tiny_cs_dict(out_dir="results"):
    return {
        "experiment": "cs",
        "n": 32,
        "seeds": [0, 1],
        "source": {"kind": "bernoulli-gaussian", "p": 0.1},
        "channel": {"m_fractions": [0.8], "snr_dbs": [12]},
        "estimator": {"grid": "adaptive", "grid_levels": 9, "q": 0, "s0": "auto",
                      "rho": 1.05, "n_sweeps": 300, "n_restarts": 2},
        "baseline": {"fista_lambda_count": 6, "fista_max_iter": 400},
        "output": {"dir": out_dir},
    }


def tiny_lossy_dict(out_dir="results"):
    return {
        "experiment": "lossy",
        "n": 200,
        "seeds": [0],
        "source": {"kind": "laplace", "scale": 1.0},
        "channel": {"lambdas": [1.0, 3.0]},
        "estimator": {"grid": "adaptive", "q": 0, "s0": "auto", "rho": 1.05,
                      "n_sweeps": 300, "n_restarts": 1},
        "baseline": {"ecsq_steps": [0.5, 1.0, 2.0], "ba_bins": 201, "ba_span": 10.0,
                     "ba_slopes": [2.0, 0.8]},
        "output": {"dir": out_dir},
    }


def tiny_denoise_dict(out_dir="results"):
    return {
        "experiment": "denoise",
        "n": 40,
        "seeds": [0, 1],
        "source": {"kind": "two-state-markov", "transitions": [0.1, 0.1],
                   "emissions": [-1.0, 1.0]},
        "channel": {"sigma2s": [0.4]},
        "estimator": {"q": 1, "n_sweeps": 150, "n_restarts": 1,
                      "burn_in": 20, "n_samples": 60},
        "output": {"dir": out_dir},
    }


class TestConfig:
    def test_loads_shipped_configs(self):
        for name in ("configs/cs.yaml", "configs/lossy.yaml", "configs/denoise.yaml"):
            cfg = load_config(name)
            assert cfg.n >= 2 and cfg.seeds

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="bogus"):
            from_dict({**tiny_cs_dict(), "bogus": 1})

    def test_unknown_section_key_names_field(self):
        data = tiny_cs_dict()
        data["estimator"]["sweepz"] = 10
        with pytest.raises(ConfigError, match="estimator.sweepz"):
            from_dict(data)

    def test_missing_required_sweep(self):
        data = tiny_cs_dict()
        del data["channel"]["m_fractions"]
        with pytest.raises(ConfigError, match="m_fractions"):
            from_dict(data)

    def test_seeds_must_be_explicit_integers(self):
        data = tiny_cs_dict()
        data["seeds"] = []
        with pytest.raises(ConfigError, match="seeds"):
            from_dict(data)
        data["seeds"] = ["time"]
        with pytest.raises(ConfigError, match="seeds"):
            from_dict(data)

    def test_grid_levels_requires_adaptive(self):
        data = tiny_cs_dict()
        data["estimator"]["grid"] = "fixed"
        with pytest.raises(ConfigError, match="grid_levels"):
            from_dict(data)

    def test_bad_experiment_kind(self):
        data = tiny_cs_dict()
        data["experiment"] = "compress"
        with pytest.raises(ConfigError, match="experiment"):
            from_dict(data)


class TestCsvIO:
    ROWS = [
        {"name": "a", "count": 3, "value": 1.25},
        {"name": "b", "count": -1, "value": 0.3333333333333333},
    ]
    COLUMNS = ("name", "count", "value")

    def test_round_trip_at_printed_precision(self, tmp_path):
        path = tmp_path / "table.csv"
        emit_csv(self.ROWS, self.COLUMNS, path)
        back = parse_csv(path)
        assert len(back) == 2
        for row, ref in zip(back, self.ROWS):
            assert row["name"] == ref["name"]
            assert row["count"] == ref["count"]
            assert row["value"] == pytest.approx(ref["value"], rel=1e-8)
        # emitting the parsed rows reproduces the bytes exactly
        path2 = tmp_path / "table2.csv"
        emit_csv(back, self.COLUMNS, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_empty_results_refused(self, tmp_path):
        with pytest.raises(ValueError):
            emit_csv([], self.COLUMNS, tmp_path / "nothing.csv")
        assert not (tmp_path / "nothing.csv").exists()

    def test_missing_column_refused(self, tmp_path):
        with pytest.raises(ValueError, match="missing"):
            emit_csv([{"name": "a"}], self.COLUMNS, tmp_path / "bad.csv")

    def test_metadata_sidecar(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_csv(self.ROWS, self.COLUMNS, path, metadata={"config": {"n": 4}, "seeds": [0]})
        meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
        assert meta["config"] == {"n": 4}
        assert meta["seeds"] == [0]
        assert meta["columns"] == list(self.COLUMNS)
        assert "package_version" in meta


class TestExperiments:
    def test_cs_rows_and_reproducibility(self, tmp_path):
        cfg = from_dict(tiny_cs_dict(str(tmp_path / "a")))
        table = run_cs_experiment(cfg)
        assert len(table.rows) == 2 * 2  # (seeds) x (mcmc, fista)
        algs = {r["algorithm"] for r in table.rows}
        assert algs == {"mcmc", "fista"}
        for row in table.rows:
            assert row["m"] == 26 and 0 < row["sigma2"] < 1
            assert row["mse"] >= 0 and row["mse_normalized"] >= 0
        p1 = table.write(str(tmp_path / "a"), metadata={"config": cfg.raw, "seeds": cfg.seeds})
        table2 = run_cs_experiment(from_dict(tiny_cs_dict(str(tmp_path / "b"))))
        p2 = table2.write(str(tmp_path / "b"), metadata={"config": cfg.raw, "seeds": cfg.seeds})
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_lossy_rows(self, tmp_path):
        cfg = from_dict(tiny_lossy_dict(str(tmp_path)))
        table = run_lossy_experiment(cfg)
        by_alg = {}
        for row in table.rows:
            by_alg.setdefault(row["algorithm"], []).append(row)
        assert len(by_alg["mcmc"]) == 2
        assert len(by_alg["ecsq"]) == 3
        assert len(by_alg["ba"]) == 2
        for row in by_alg["mcmc"]:
            assert 0 <= row["rate_bits"]
            assert 0 <= row["distortion"] <= 3.0
        assert all(row["seed"] == -1 for row in by_alg["ba"])

    def test_denoise_rows_report_ratio(self, tmp_path, capsys):
        cfg = from_dict(tiny_denoise_dict(str(tmp_path)))
        table = run_denoise_experiment(cfg)
        printed = capsys.readouterr().out
        assert "ratio" in printed  # reported, never asserted
        assert len(table.rows) == 2
        for row in table.rows:
            assert row["mse_ratio"] == pytest.approx(row["mse_map"] / row["mse_mmse"], rel=1e-9)

    def test_threaded_matches_serial(self, tmp_path):
        cfg = from_dict(tiny_denoise_dict(str(tmp_path)))
        serial = run_denoise_experiment(cfg, threads=1, verbose=False)
        threaded = run_denoise_experiment(cfg, threads=3, verbose=False)
        assert serial.rows == threaded.rows

    def test_oracle_suite_agrees(self):
        table = run_oracle_suite(n_trials=6, seed=0, n=4)
        assert all(row["agree"] == 1 for row in table.rows)

    def test_noiseless_well_conditioned_reaches_quantization_floor(self, tmp_path):
        # plenty of measurements at infinite SNR: both algorithms should be
        # limited only by their own resolution (square Gaussian matrices are
        # badly conditioned, so "well conditioned" means oversampling here)
        data = tiny_cs_dict(str(tmp_path))
        data["n"] = 48
        data["seeds"] = [0, 1]
        data["channel"] = {"m_fractions": [2.0], "snr_dbs": [float("inf")]}
        data["estimator"] = {"grid": "adaptive", "q": 0, "s0": "auto",
                             "rho": 1.05, "n_sweeps": 600, "n_restarts": 2}
        table = run_cs_experiment(from_dict(data))
        floor = (0.25**2) / 12  # fixed-grid step at n=48 is 1/4
        for row in table.rows:
            assert row["mse"] <= floor, row

    def test_posterior_mean_beats_map_at_low_snr(self):
        # at low SNR the hard energy minimizer gives up information that the
        # posterior average keeps; verified on a sticky two-state source
        cfg = from_dict({
            "experiment": "denoise", "n": 64, "seeds": list(range(10)),
            "source": {"kind": "two-state-markov", "transitions": [0.1, 0.1],
                       "emissions": [-1.0, 1.0]},
            "channel": {"sigma2s": [2.0]},
            "estimator": {"q": 1, "n_sweeps": 200, "n_restarts": 2,
                          "burn_in": 40, "n_samples": 150},
        })
        table = run_denoise_experiment(cfg, threads=2, verbose=False)
        wins = sum(1 for row in table.rows if row["mse_mmse"] <= row["mse_map"])
        assert wins >= 8


class TestCli:
    def run_cli(self, *args):
        return subprocess.run([sys.executable, "-m", "mdlest.harness.cli", *args],
                              capture_output=True, text=True)

    def test_denoise_verb_and_exit_zero(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(tiny_denoise_dict(str(tmp_path / "out"))))
        proc = self.run_cli("denoise", "--config", str(cfg_path))
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "out" / "denoise_results.csv").exists()

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "bad.yaml"
        data = tiny_denoise_dict(str(tmp_path))
        data["estimator"]["bogus_key"] = 1
        cfg_path.write_text(yaml.safe_dump(data))
        proc = self.run_cli("denoise", "--config", str(cfg_path))
        assert proc.returncode == 2
        assert "bogus_key" in proc.stderr

    def test_seed_and_out_overrides(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(tiny_denoise_dict(str(tmp_path / "ignored"))))
        proc = self.run_cli("denoise", "--config", str(cfg_path),
                            "--seed", "7", "--out", str(tmp_path / "override"))
        assert proc.returncode == 0, proc.stderr
        rows = parse_csv(tmp_path / "override" / "denoise_results.csv")
        assert {row["seed"] for row in rows} == {7}

    def test_oracle_verb(self, tmp_path):
        proc = self.run_cli("oracle", "--trials", "4", "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr
        rows = parse_csv(tmp_path / "oracle_results.csv")
        assert all(row["agree"] == 1 for row in rows)
