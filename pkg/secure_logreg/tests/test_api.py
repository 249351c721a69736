"""
Tests for the REST surface
"""
import pytest
from fastapi.testclient import TestClient

from secure_logreg import __version__
from secure_logreg.api import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestHealth:
    def test_reports_defaults(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"] == __version__
        assert body["config"]["share_policy"] == "gradient_only"


class TestSimulate:
    """Test the synthetic end-to-end endpoint"""

    def test_fit_and_parity(self, client):
        response = client.post("/simulate", json={
            "records": 600, "features": 4, "institutions": 3, "data_seed": 1, "lam": 1.0,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["fit"]["samples"] == 600
        assert body["fit"]["features"] == 3
        assert body["fit"]["converged"] is True
        assert len(body["fit"]["beta"]) == 4
        assert len(body["true_beta"]) == 4
        assert body["parity"]["passed"] is True
        assert body["config"]["lambda"] == 1.0

    def test_response_has_no_rows(self, client):
        body = client.post("/simulate", json={"records": 100, "features": 3}).json()
        assert set(body) == {"fit", "parity", "true_beta", "config"}

    def test_threshold_above_centers_is_422(self, client):
        response = client.post("/simulate", json={"records": 100, "threshold": 5, "centers": 3})
        assert response.status_code == 422

    def test_out_of_range_body_is_422(self, client):
        response = client.post("/simulate", json={"records": 0})
        assert response.status_code == 422
