import json

import pytest
from fastapi.testclient import TestClient

from gpcpd.api import main
from gpcpd.bench.instances import fixture_path
from gpcpd.core import DenseTensor
from gpcpd.core.parser import tensor_to_dict


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(main, "UPLOAD_DIR", tmp_path / "uploads")
    monkeypatch.setattr(main, "RESULTS_DIR", tmp_path / "results")
    return TestClient(main.app)


def _upload(client, name, content):
    response = client.post("/upload", files={"file": (name, content, "application/json")})
    assert response.status_code == 200
    return response.json()["job_id"]


def _upload_fixture(client, name):
    return _upload(client, f"{name}.json", fixture_path(name).read_bytes())


def test_root(client):
    assert client.get("/").json() == {"message": "Welcome to the gpcpd API"}


def test_decomposition_job_lifecycle(client):
    job_id = _upload_fixture(client, "slices_4x4x3")

    status = client.get(f"/jobs/{job_id}").json()
    assert status["status"] == "completed"
    assert status["tensor_info"]["dims"] == [4, 4, 3]

    response = client.post(f"/decompose/{job_id}", json={"rank": 4})
    assert response.status_code == 200
    assert response.json()["status"] == "processing"

    results = client.get(f"/results/{job_id}")
    assert results.status_code == 200
    body = results.json()
    assert body["status"] == "completed"
    assert body["summary"]["method"] == "decompose"
    assert body["summary"]["rel_resid"] < 1e-9

    download = client.get(body["download_url"])
    assert download.status_code == 200
    assert download.json()["format"] == "cpfactors-v1"
    assert download.json()["rank"] == 4

    assert client.delete(f"/jobs/{job_id}").status_code == 200
    assert client.get(f"/jobs/{job_id}").status_code == 404
    assert list((main.UPLOAD_DIR).iterdir()) == []


def test_approximation_job(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    response = client.post(f"/approximate/{job_id}", json={"rank": 2, "refine": True, "max_als_iters": 20})
    assert response.status_code == 200
    summary = client.get(f"/results/{job_id}").json()["summary"]
    assert summary["method"] == "approximate"
    assert summary["details"]["resid_opt"] <= summary["details"]["resid_gp"] * (1 + 1e-10)
    assert 1 <= summary["details"]["als_iters"] <= 20


def test_gevd_job(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    assert client.post(f"/decompose/{job_id}", json={"rank": 4, "method": "gevd"}).status_code == 200
    body = client.get(f"/results/{job_id}").json()
    assert body["summary"]["method"] == "gevd"
    assert body["summary"]["rel_resid"] < 1e-9


def test_gevd_cannot_reshape(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    response = client.post(f"/decompose/{job_id}", json={"rank": 4, "method": "gevd", "reshape": True})
    assert response.status_code == 400


def test_request_validation(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    assert client.post(f"/decompose/{job_id}", json={"rank": 0}).status_code == 422
    assert client.post(f"/approximate/{job_id}", json={"rank": 2, "als_rel_tol": 0}).status_code == 422
    assert client.post(f"/approximate/{job_id}", json={"rank": 2, "recovery": "eigen"}).status_code == 422


def test_unknown_job(client):
    assert client.get("/jobs/missing").status_code == 404
    assert client.post("/decompose/missing", json={"rank": 2}).status_code == 404
    assert client.get("/results/missing").status_code == 404


def test_malformed_upload_fails_analysis(client):
    job_id = _upload(client, "broken.json", b'{"format": "ctensor-v1", x}')
    assert client.get(f"/jobs/{job_id}").json()["status"] == "failed"

    results = client.get(f"/results/{job_id}")
    assert results.status_code == 400
    assert results.json()["error"]["error_type"] == "FormatError"
    assert results.json()["error"]["details"]["offset"] == 25

    assert client.post(f"/decompose/{job_id}", json={"rank": 2}).status_code == 400


def test_rank_bound_failure_is_reported_as_bad_request(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    client.post(f"/decompose/{job_id}", json={"rank": 5})
    results = client.get(f"/results/{job_id}")
    assert results.status_code == 400
    assert results.json()["error"]["error_type"] == "RankBoundError"
    assert results.json()["error"]["details"]["bound"] == "n_1"


def test_numerical_failure_is_unprocessable(client):
    content = json.dumps(tensor_to_dict(DenseTensor.zeros((3, 3, 2)))).encode("utf-8")
    job_id = _upload(client, "zero.json", content)
    client.post(f"/decompose/{job_id}", json={"rank": 2, "method": "gevd"})
    results = client.get(f"/results/{job_id}")
    assert results.status_code == 422
    assert results.json()["status"] == "failed"
    assert results.json()["error"]["error_type"] == "PencilError"


def test_bench_job(client):
    response = client.post("/bench", json={"dims": [5, 4, 3], "rank": 2, "eps": [0.0], "trials": 1})
    assert response.status_code == 200
    job_id = response.json()["job_id"]

    body = client.get(f"/results/{job_id}").json()
    assert body["status"] == "completed"
    report = body["bench_report"]
    assert report["format"] == "benchreport-v1"
    assert len(report["records"]) == 1
    assert body["download_url"] == f"/download/{job_id}/bench_{job_id}.json"
    assert client.get(body["download_url"]).json()["format"] == "benchreport-v1"

    # benchmark jobs have no tensor to decompose
    assert client.post(f"/decompose/{job_id}", json={"rank": 2}).status_code == 400


def test_invalid_bench_request(client):
    assert client.post("/bench", json={"dims": [5, 4], "rank": 2}).status_code == 422


def test_download_rejects_unknown_file(client):
    job_id = _upload_fixture(client, "slices_4x4x3")
    client.post(f"/decompose/{job_id}", json={"rank": 4})
    assert client.get(f"/download/{job_id}/other.json").status_code == 404
