import pytest
from fastapi.testclient import TestClient

from src.api import app
from src.graph import EXPERIMENTS
from src.nodes.exponents import exponent_report, exponent_verdict
from src.state import ExperimentConfig
from src.tools.report_io import report_payload


@pytest.fixture
def client():
    return TestClient(app)


def test_root_lists_the_experiments(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["endpoints"]["experiments"] == [f"/experiments/{name}" for name in EXPERIMENTS]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


@pytest.mark.parametrize("p, q", [("4/3", "2"), ("6/5", "3/2"), ("4/3", "inf")])
def test_exponents_match_the_verdict(client, p, q):
    response = client.post("/exponents", json={"d": 3, "p": p, "q": q})
    assert response.status_code == 200
    assert response.json() == exponent_verdict(3, p, q)


def test_exponents_below_one_are_unprocessable(client):
    response = client.post("/exponents", json={"d": 3, "p": "1/2", "q": "2"})
    assert response.status_code == 422
    assert response.json()["status"] == "error"
    assert ">= 1" in response.json()["message"]


def test_exponent_experiment_matches_the_report(client):
    response = client.post("/experiments/exponents", json={"dimension": 2})
    assert response.status_code == 200
    assert response.json() == report_payload(exponent_report(ExperimentConfig(dimension=2)))
    assert response.json()["passed"] is True


def test_unknown_experiment(client):
    response = client.post("/experiments/fourier", json={})
    assert response.status_code == 404
    assert "fourier" in response.json()["message"]


def test_bad_experiment_config(client):
    response = client.post("/experiments/exponents", json={"dimension": 7})
    assert response.status_code == 422
    assert response.json()["status"] == "error"
