import numpy as np
import pytest
from fastapi.testclient import TestClient

from qmeasure.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}


class TestExperimentEndpoints:
    def test_stern_gerlach_exact(self, client):
        response = client.post("/sg", json={"exact": True, "seed": 1})
        assert response.status_code == 200
        body = response.json()
        np.testing.assert_allclose(body["exact_probabilities"], [0.5, 0.5], atol=1e-12)
        assert body["sampled_frequencies"] is None
        assert body["seed"] == 1
        assert body["config"]["exact"] is True

    def test_stern_gerlach_sampled(self, client):
        response = client.post("/sg", json={"shots": 20_000, "seed": 2})
        body = response.json()
        assert sum(body["counts"]) == 20_000
        sigma = np.sqrt(0.25 / 20_000)
        assert abs(body["sampled_frequencies"][0] - 0.5) <= 3 * sigma

    def test_mach_zehnder_defaults_to_open_interferometer(self, client):
        response = client.post("/mz", json={"exact": True})
        np.testing.assert_allclose(response.json()["exact_probabilities"], [0.5, 0.5], atol=1e-12)

    def test_mach_zehnder_with_mirror(self, client):
        response = client.post("/mz", json={"second_mirror": True, "phase": 0.0, "exact": True})
        np.testing.assert_allclose(response.json()["exact_probabilities"], [0.0, 1.0], atol=1e-12)

    def test_measure_reports_fidelity(self, client):
        response = client.post(
            "/measure", json={"amps": [0.6, 0.0, 0.8, 0.0], "shots": 5000, "seed": 3}
        )
        body = response.json()
        np.testing.assert_allclose(body["exact_probabilities"], [0.36, 0.64], atol=1e-12)
        assert body["diagnostics"]["min_post_state_fidelity"] >= 1 - 1e-10

    def test_double_slit_returns_profile(self, client):
        response = client.post("/double-slit", json={"n_points": 128})
        body = response.json()
        assert len(body["x"]) == 128
        assert len(body["density"]) == 128
        assert body["diagnostics"]["normalization"] == pytest.approx(1.0, abs=1e-9)
        assert "measured_fringe_spacing" in body["diagnostics"]

    def test_double_slit_single_slit_mode(self, client):
        response = client.post("/double-slit", json={"n_points": 128, "slit_2_open": False})
        assert response.status_code == 200
        assert "measured_fringe_spacing" not in response.json()["diagnostics"]

    def test_chsh_default_is_tsirelson(self, client):
        response = client.post("/chsh", json={"seed": 4})
        body = response.json()
        assert body["diagnostics"]["S_exact"] == pytest.approx(2.8284271247461903, abs=1e-9)

    def test_chsh_product_state_classical(self, client):
        response = client.post("/chsh", json={"state": "up-up"})
        assert abs(response.json()["diagnostics"]["S_exact"]) <= 2 + 1e-9

    def test_nosignal_small_run(self, client):
        response = client.post(
            "/nosignal",
            json={"n_pairs_per_group": 40, "n_groups": 20, "process_pool_size": 5, "seed": 5},
        )
        body = response.json()
        diag = body["diagnostics"]
        assert abs(diag["decoded_accuracy"] - 0.5) <= diag["chance_3sigma_band"]
        assert diag["max_trace_distance"] <= 1e-12
        assert len(diag["message_bits"]) == 20

    def test_device_runs_small(self, client):
        response = client.post("/device-runs", json={"n_env_qubits": 3, "n_runs": 100, "seed": 6})
        body = response.json()
        assert sum(body["counts"]) == 100
        assert body["diagnostics"]["mean_marker_coherence"] > 0


class TestVerifyEndpoint:
    def test_named_subset_passes(self, client):
        response = client.post(
            "/verify", json={"checks": ["stern_gerlach_exact", "mach_zehnder"], "fast": True}
        )
        body = response.json()
        assert body["passed"] is True
        assert [c["name"] for c in body["checks"]] == ["stern_gerlach_exact", "mach_zehnder"]
        assert all(c["passed"] for c in body["checks"])

    def test_unknown_check_rejected(self, client):
        response = client.post("/verify", json={"checks": ["nope"]})
        assert response.status_code == 422


class TestValidation:
    def test_unknown_state_name(self, client):
        response = client.post("/measure", json={"state": "sideways"})
        assert response.status_code == 422
        assert "unknown qubit state" in response.json()["detail"]

    def test_pydantic_range_validation(self, client):
        response = client.post("/device-runs", json={"n_env_qubits": 20})
        assert response.status_code == 422

    def test_negative_shots_rejected(self, client):
        response = client.post("/sg", json={"shots": -5})
        assert response.status_code == 422


class TestDeterminism:
    def test_same_seed_same_report(self, client):
        payload = {"shots": 5000, "seed": 77}
        a = client.post("/sg", json=payload).json()
        b = client.post("/sg", json=payload).json()
        a.pop("wall_time_s")
        b.pop("wall_time_s")
        assert a == b
