import random

import pytest
from fastapi.testclient import TestClient

from modelserver.plan import TrainingPlan
from modelserver.server import build_app
from modelserver.train import train

from conftest import CUES, NEUTRAL, fast_hp, make_records, write_records


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("server")
    rng = random.Random(3)
    records = write_records(tmp / "fine.jsonl", make_records(rng, 48, CUES[:4], NEUTRAL[:4]))
    plan = TrainingPlan(
        "implicit", finetune_records=str(records), hyperparameters=fast_hp(max_epochs=4)
    )
    with TestClient(build_app(train(plan))) as c:
        yield c


class TestScoreEndpoint:
    def test_scores_in_order_and_range(self, client):
        instances = [
            "@BAC1$ inhibits @BAC2$.",
            "@BAC1$ accompanies @BAC2$ in the sample.",
            "@BAC1$ suppresses @BAC2$.",
        ]
        body = client.post("/score", json={"instances": instances}).json()
        assert len(body["scores"]) == 3
        assert all(0.0 <= s <= 1.0 for s in body["scores"])
        assert body["errors"] == []

    def test_empty_batch(self, client):
        body = client.post("/score", json={"instances": []}).json()
        assert body == {"scores": [], "errors": []}

    def test_per_item_marker_errors(self, client):
        instances = ["@BAC1$ inhibits @BAC2$.", "no markers at all", "@BAC1$ only"]
        body = client.post("/score", json={"instances": instances}).json()
        assert len(body["scores"]) == 3
        assert body["scores"][1] == 0.0
        assert body["scores"][2] == 0.0
        assert [e["index"] for e in body["errors"]] == [1, 2]
        assert all(e["error"] == "missing_markers" for e in body["errors"])

    def test_malformed_bodies_keep_service_up(self, client):
        assert client.post("/score", content=b"not json").status_code == 400
        assert client.post("/score", json={"wrong": []}).status_code == 400
        assert client.post("/score", json={"instances": [1, 2]}).status_code == 400
        for response in (
            client.post("/score", content=b"not json"),
            client.post("/score", json={"wrong": []}),
        ):
            assert "error" in response.json()
        # still serving afterwards
        body = client.post("/score", json={"instances": ["@BAC1$ x @BAC2$"]}).json()
        assert len(body["scores"]) == 1

    def test_duplicate_instances_score_identically(self, client):
        text = "@BAC1$ inhibits @BAC2$."
        body = client.post("/score", json={"instances": [text, text]}).json()
        assert body["scores"][0] == body["scores"][1]


class TestOtherRoutes:
    def test_ner_unavailable(self, client):
        response = client.post("/ner", json={"sentences": ["x"]})
        assert response.status_code == 404
        assert "error" in response.json()

    def test_info(self, client):
        body = client.get("/info").json()
        assert body["regimen"] == "implicit"
        assert "sigmoid" in body["head"]
