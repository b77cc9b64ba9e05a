import pytest

from app import create_app

MIXED = {"m": 1, "n": 1, "a": [1.0, 2.0], "b": [-1.0, -2.0], "alpha": [1], "beta": [1]}


@pytest.fixture
def client():
    app = create_app()
    app.config["TESTING"] = True
    return app.test_client()


def test_index(client):
    body = client.get("/").get_json()
    assert body["status"] == "ok"
    assert "/api/catalog" in body["endpoints"]


def test_catalog(client):
    res = client.get("/api/catalog?cones=4")
    assert res.status_code == 200
    body = res.get_json()
    assert body["status"] == "success"
    assert body["total"] == 17


def test_catalog_requires_cones(client):
    res = client.get("/api/catalog")
    assert res.status_code == 400
    assert res.get_json()["code"] == "ConfigError"


def test_catalog_rejects_zero(client):
    res = client.get("/api/catalog?cones=0")
    assert res.status_code == 400
    assert res.get_json() == {"status": "error", "code": "LengthMismatch", "message": "total must be >= 1, got 0"}


def test_verify_rejects_bad_ordering(client):
    res = client.post("/api/verify", json={**MIXED, "a": [2.0, 1.0]})
    assert res.status_code == 400
    assert res.get_json()["code"] == "OrderingViolation"


def test_verify_requires_json_object(client):
    res = client.post("/api/verify", data="not json", content_type="text/plain")
    assert res.status_code == 400
    assert res.get_json()["code"] == "ConfigError"


def test_verify_infeasible_horizontal_end(client):
    body = {"m": 1, "n": 0, "a": [1.0, 2.0], "alpha": [-1], "require_horizontal_ends": True}
    res = client.post("/api/verify", json=body)
    assert res.status_code == 200
    report = res.get_json()["report"]
    assert report["passed"] is False
    assert report["checks"]["horizontal_ends"]["code"] == "Infeasible"


def test_minimal(client):
    res = client.post("/api/minimal", json=MIXED)
    assert res.status_code == 200
    section = res.get_json()["minimal_counterpart"]
    assert section["orientation"] == "vertical"
    assert len(section["measured_loops"]) == 4


def test_minimal_normalization_infeasible(client):
    body = {**MIXED, "b": [-1.0, -3.0], "beta": [-1], "minimal": {"normalize": True}}
    res = client.post("/api/minimal", json=body)
    assert res.status_code == 422
    assert res.get_json()["code"] == "OrderingInfeasible"
