"""
Tests for report outputs and the parity report
"""
import json

import numpy as np
import pandas as pd
import pytest

from secure_logreg.errors import DimensionMismatchError
from secure_logreg.protocol import ProtocolConfig, run_protocol
from secure_logreg.report import (
    parity_report,
    r_squared,
    run_scaling_sweep,
    write_deviance_trace,
    write_fit_result,
    write_scaling_csv,
)
from secure_logreg.sharing import SharingParams


class TestParity:
    """Test the federated-vs-centralized comparison"""

    def test_identical_vectors(self):
        report = parity_report([0.1, -0.5, 2.0], [0.1, -0.5, 2.0])
        assert report.passed
        assert report.max_abs_diff == 0.0
        assert report.r_squared == pytest.approx(1.0)

    def test_threshold_exceeded(self):
        report = parity_report([0.1, -0.5, 2.0], [0.1, -0.5, 2.001], threshold=1e-6)
        assert not report.passed
        assert report.max_abs_diff == pytest.approx(1e-3)
        assert report.diffs[2] == pytest.approx(-1e-3)

    def test_constant_vectors(self):
        assert r_squared([1.0, 1.0], [1.0, 1.0]) == 1.0
        assert r_squared([1.0], [2.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            r_squared([1.0, 2.0], [1.0, 2.0, 3.0])


class TestOutputs:
    """Test JSON/CSV writers"""

    @pytest.fixture
    def result(self, consortium):
        return run_protocol(consortium[0], ProtocolConfig(sharing=SharingParams(2, 3)))

    def test_fit_json_mirrors_table_columns(self, result, tmp_path):
        path = write_fit_result(result, tmp_path / "fit.json", {"config": {"lambda": 1.0}})
        payload = json.loads(path.read_text())
        for key in ("samples", "features", "iterations", "central_runtime_s", "total_runtime_s",
                    "bytes_transmitted", "data_transmitted_mb", "beta", "converged"):
            assert key in payload
        assert payload["samples"] == 600
        assert payload["config"] == {"lambda": 1.0}

    def test_deviance_trace_csv(self, result, tmp_path):
        path = write_deviance_trace(result.deviance_trace, tmp_path / "deviance.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["iteration", "deviance", "abs_delta"]
        assert len(frame) == result.iterations
        assert np.isnan(frame["abs_delta"].iloc[0])
        assert frame["abs_delta"].iloc[-1] < 1e-10


class TestScalingSweep:
    """Test the institution-count sweep"""

    def test_rows_per_sweep_point(self, tmp_path):
        points = run_scaling_sweep([2, 3], records_per_institution=200, d=3,
                                   cfg=ProtocolConfig(sharing=SharingParams(2, 3)))
        assert [p.institutions for p in points] == [2, 3]
        assert all(p.samples == 200 * p.institutions for p in points)
        frame = pd.read_csv(write_scaling_csv(points, tmp_path / "scaling.csv"))
        assert len(frame) == 2
        assert "central_share" in frame.columns

    @pytest.mark.slow
    def test_central_time_flat(self):
        cfg = ProtocolConfig(sharing=SharingParams(2, 3))
        small, large = run_scaling_sweep([5, 50], records_per_institution=1000, d=6, cfg=cfg)
        assert large.central_runtime_s <= 3 * small.central_runtime_s

    @pytest.mark.slow
    def test_hundred_institutions(self):
        (point,) = run_scaling_sweep([100], records_per_institution=10_000, d=6,
                                     cfg=ProtocolConfig(sharing=SharingParams(2, 3)))
        assert point.converged
        assert point.samples == 1_000_000
