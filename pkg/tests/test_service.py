import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from comprel import __version__
from comprel.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def train_body(corpus_dir, out_dir, **kw):
    body = {
        "data_dir": str(corpus_dir),
        "embeddings": str(corpus_dir / "embeddings.txt"),
        "out_dir": str(out_dir),
        "train": {"max_epochs": 3, "patience": 2},
    }
    body.update(kw)
    return body


class TestHealth:
    def test_ok(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}


class TestStats:
    def test_ok(self, client, corpus_dir):
        response = client.post("/stats", json={"data_dir": str(corpus_dir)})
        assert response.status_code == 200
        payload = response.json()["payload"]
        assert payload["splits"]["train"]["compounds"] == 200
        assert set(payload["correspondence"]) == {"A_to_B", "B_to_A"}

    def test_missing_split_names_file(self, client, tmp_path):
        response = client.post("/stats", json={"data_dir": str(tmp_path)})
        assert response.status_code == 400
        assert "train.tsv" in response.json()["detail"]

    def test_unknown_field_rejected(self, client, corpus_dir):
        response = client.post(
            "/stats", json={"data_dir": str(corpus_dir), "datadir": "x"}
        )
        assert response.status_code == 422


class TestTrain:
    def test_ok(self, client, corpus_dir, tmp_path):
        body = train_body(corpus_dir, tmp_path, task="B", seed=2)
        response = client.post("/train", json=body)
        assert response.status_code == 200
        payload = response.json()
        assert payload["tasks"] == ["B"]
        assert payload["stop_reason"] in ("early-stop", "max-epochs")
        assert 0.0 <= payload["scores"]["B"]["dev"]["accuracy"] <= 1.0
        assert (tmp_path / payload["bundle_id"] / "checkpoint.npz").exists()

    def test_bad_model_kind(self, client, corpus_dir, tmp_path):
        body = train_body(corpus_dir, tmp_path, model="transformer")
        response = client.post("/train", json=body)
        assert response.status_code == 400
        assert "model" in response.json()["detail"]

    def test_missing_required_field(self, client):
        response = client.post("/train", json={"data_dir": "somewhere"})
        assert response.status_code == 422

    def test_unknown_train_key(self, client, corpus_dir, tmp_path):
        body = train_body(corpus_dir, tmp_path)
        body["train"]["max_epoch"] = 9
        response = client.post("/train", json=body)
        assert response.status_code == 422

    def test_missing_corpus(self, client, tmp_path):
        body = train_body(tmp_path / "nope", tmp_path)
        response = client.post("/train", json=body)
        assert response.status_code == 400


class TestReport:
    def test_round_trip(self, client, corpus_dir, tmp_path):
        body = train_body(corpus_dir, tmp_path, task="A", include_test=True)
        trained = client.post("/train", json=body)
        assert trained.status_code == 200
        bundle = trained.json()["bundle"]
        response = client.post("/report", json={"bundles": [bundle]})
        assert response.status_code == 200
        payload = response.json()["payload"]
        assert "A" in payload["taxonomies"]
        assert payload["taxonomies"]["A"]["test"]["models"]

    def test_not_a_bundle(self, client, tmp_path):
        response = client.post("/report", json={"bundles": [str(tmp_path)]})
        assert response.status_code == 400

    def test_empty_list(self, client):
        response = client.post("/report", json={"bundles": []})
        assert response.status_code == 400


class TestSelfcheck:
    def test_passes(self, client):
        response = client.post("/selfcheck", json={})
        assert response.status_code == 200
        payload = response.json()
        assert payload["passed"] is True
        names = {c["name"] for c in payload["checks"]}
        assert "gradient-check" in names
        assert "metrics-oracle" in names
        assert all(c["passed"] for c in payload["checks"])
