import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from gluing.api import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    assert client.get("/health").status_code == 200


def test_bad_map_is_422(client):
    assert client.post("/fixed-points", json={"map": {"nope": 1}}).status_code == 422
    assert client.post("/puzzle", json={"toy_model": True, "depth": 99}).status_code == 422


def test_budget_exhausted_is_409(client):
    body = {"edges": [["A", "B"], ["B", "C"], ["C", "A"]], "critical": {"c": "A"}, "k_max": 2}
    assert client.post("/close-orbit", json=body).status_code == 409


def test_puzzle_relations(client):
    res = client.post("/puzzle", json={"toy_model": True, "depth": 2}).json()
    assert res["counts"] == [1, 2, 6]
    assert sum(r["piece"].startswith("P2,") for r in res["relations"]) == 6
