"""
Tests for the command-line entry point
"""
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from secure_logreg.cli import (
    EXIT_CONFIG,
    EXIT_CONVERGENCE,
    EXIT_DATA,
    EXIT_OK,
    EXIT_PARITY,
    MANIFEST_NAME,
    RunManifest,
    main,
)
from secure_logreg.data import TabularSource, load_csv
from tests.test_regression import irls_oracle


@pytest.fixture
def data_dir(tmp_path):
    out = tmp_path / "data"
    code = main(["gen-data", "--records", "900", "--features", "4", "--institutions", "3",
                 "--seed", "7", "--out-dir", str(out)])
    assert code == EXIT_OK
    return out


def csvs(directory):
    return sorted(str(p) for p in directory.glob("institution-*.csv"))


class TestGenData:
    """Test synthetic dataset generation"""

    def test_files_and_manifest(self, data_dir):
        files = csvs(data_dir)
        assert len(files) == 3
        assert sum(len(pd.read_csv(f)) for f in files) == 900
        manifest = RunManifest.read(data_dir / MANIFEST_NAME)
        assert manifest.command == "gen-data"
        assert set(manifest.outputs) == set(files)
        assert len(manifest.extra["true_beta"]) == 4

    def test_single_institution(self, tmp_path):
        assert main(["gen-data", "--records", "50", "--features", "3", "--out-dir", str(tmp_path)]) == EXIT_OK
        assert len(csvs(tmp_path)) == 1

    def test_same_flags_same_checksums(self, tmp_path):
        argv = ["gen-data", "--records", "100", "--features", "3", "--institutions", "2", "--seed", "1"]
        main(argv + ["--out-dir", str(tmp_path / "a")])
        main(argv + ["--out-dir", str(tmp_path / "b")])
        a = RunManifest.read(tmp_path / "a" / MANIFEST_NAME)
        b = RunManifest.read(tmp_path / "b" / MANIFEST_NAME)
        assert sorted(a.outputs.values()) == sorted(b.outputs.values())

    def test_invalid_spec_is_config_error(self, tmp_path):
        code = main(["gen-data", "--records", "10", "--features", "1", "--out-dir", str(tmp_path)])
        assert code == EXIT_CONFIG


class TestFit:
    """Test the federated fit command"""

    def test_outputs(self, data_dir, tmp_path):
        out = tmp_path / "results"
        transcript = tmp_path / "run.jsonl"
        code = main(["fit", "--data", *csvs(data_dir), "--lambda", "1", "--share-policy", "all",
                     "--transcript", str(transcript), "--out-dir", str(out)])
        assert code == EXIT_OK
        fit = json.loads((out / "fit.json").read_text())
        assert fit["samples"] == 900
        assert fit["features"] == 3
        assert fit["converged"] is True
        assert fit["config"]["share_policy"] == "all_summaries"
        trace = pd.read_csv(out / "deviance.csv")
        assert len(trace) == fit["iterations"]
        assert transcript.is_file()

    def test_missing_data_is_data_error_without_outputs(self, tmp_path):
        out = tmp_path / "results"
        code = main(["fit", "--data", str(tmp_path / "missing.csv"), "--out-dir", str(out)])
        assert code == EXIT_DATA
        assert not out.exists()

    def test_bad_threshold_is_config_error(self, data_dir, tmp_path):
        code = main(["fit", "--data", *csvs(data_dir), "--threshold", "4", "--centers", "3",
                     "--out-dir", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_composite_modulus_is_config_error(self, data_dir, tmp_path):
        code = main(["fit", "--data", *csvs(data_dir), "--modulus", "91", "--out-dir", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_max_iter_reached_is_convergence_error(self, data_dir, tmp_path):
        code = main(["fit", "--data", *csvs(data_dir), "--max-iter", "1", "--out-dir", str(tmp_path)])
        assert code == EXIT_CONVERGENCE

    def test_lambda_zero_single_institution(self, tmp_path):
        data = tmp_path / "data"
        main(["gen-data", "--records", "2000", "--features", "3", "--seed", "2", "--out-dir", str(data)])
        out = tmp_path / "results"
        assert main(["fit", "--data", *csvs(data), "--lambda", "0", "--out-dir", str(out)]) == EXIT_OK
        fit = json.loads((out / "fit.json").read_text())
        assert fit["converged"] is True
        (path,) = csvs(data)
        expected = irls_oracle(load_csv(TabularSource(Path(path), "y")))
        np.testing.assert_allclose(fit["beta"], expected, rtol=0, atol=1e-6)


class TestCompare:
    """Test the parity command"""

    @pytest.mark.parametrize("lam", ["0.1", "1", "10"])
    def test_lambda_sweep_passes(self, data_dir, tmp_path, lam):
        out = tmp_path / "cmp"
        assert main(["compare", "--data", *csvs(data_dir), "--lambda", lam, "--out-dir", str(out)]) == EXIT_OK
        parity = json.loads((out / "parity.json").read_text())
        assert parity["passed"] is True
        assert parity["r_squared"] >= 0.999999

    def test_single_institution_is_near_exact(self, data_dir, tmp_path):
        out = tmp_path / "cmp"
        assert main(["compare", "--data", *csvs(data_dir), "--partition", "1", "--out-dir", str(out)]) == EXIT_OK
        assert json.loads((out / "parity.json").read_text())["max_abs_diff"] <= 1e-9

    def test_repartitioned_pool(self, data_dir, tmp_path):
        out = tmp_path / "cmp"
        code = main(["compare", "--data", *csvs(data_dir), "--partition", "5", "--partition-seed", "3",
                     "--out-dir", str(out)])
        assert code == EXIT_OK

    def test_impossible_threshold_fails_parity(self, data_dir, tmp_path):
        code = main(["compare", "--data", *csvs(data_dir), "--parity-threshold", "0", "--out-dir", str(tmp_path)])
        assert code == EXIT_PARITY


class TestBenchAndReplay:
    """Test the scaling sweep and manifest replay"""

    def test_bench_scaling_rows(self, tmp_path):
        code = main(["bench-scaling", "--sweep", "2", "3", "--records-per-institution", "100",
                     "--features", "3", "--out-dir", str(tmp_path)])
        assert code == EXIT_OK
        assert len(pd.read_csv(tmp_path / "scaling.csv")) == 2

    def test_replay_reproduces_outputs(self, data_dir, tmp_path):
        out = tmp_path / "results"
        assert main(["fit", "--data", *csvs(data_dir), "--out-dir", str(out)]) == EXIT_OK
        manifest = RunManifest.read(out / MANIFEST_NAME)
        assert str(out / "deviance.csv") in manifest.outputs
        assert str(out / "fit.json") in manifest.timed_outputs
        assert main(["replay", "--manifest", str(out / MANIFEST_NAME)]) == EXIT_OK
