import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from bactrex.classify import (
    BaselineClassifier,
    ClassifierConfig,
    DegenerateTraining,
    MissingMarkers,
    RemoteClassifier,
    classify,
    default_baseline,
    featurize,
    fit_baseline,
    load_model,
    loss_and_grad,
    make_classifier,
    save_model,
    score,
)
from bactrex.remote import ProtocolViolation, Transport
from bactrex.transform import make_dataset

from synth import CUE_TOKENS, smoke_corpus


def formula_oracle(model, tagged_text):
    """Recompute the documented scoring formula independently."""
    region, distance, negation = featurize(tagged_text, model.window, model.negation_cues)
    z = model.bias + model.distance_weight * distance + model.negation_weight * negation
    z += sum(w for term, w in model.lexicon.items() if term in region)
    return 1.0 / (1.0 + math.exp(-z))


class TestDefaultBaseline:
    def test_interaction_cue_clears_threshold(self):
        model = default_baseline()
        text = "@BAC1$ inhibits the growth of @BAC2$."
        value = model.score_text(text)
        assert value == pytest.approx(formula_oracle(model, text))
        assert value > 0.5

    def test_plain_comention_stays_below(self):
        model = default_baseline()
        text = "@BAC1$ and @BAC2$ were both detected in soil samples."
        value = model.score_text(text)
        assert value == pytest.approx(formula_oracle(model, text))
        assert value <= 0.5

    def test_missing_marker(self):
        model = default_baseline()
        with pytest.raises(MissingMarkers):
            model.score_text("@BAC1$ grows alone.")

    def test_scores_bounded(self):
        model = default_baseline()
        for text in (
            "@BAC1$ inhibits inhibited inhibition kills @BAC2$",
            "@BAC1$ @BAC2$",
            "@BAC1$ " + "far " * 50 + "@BAC2$",
        ):
            assert 0.0 <= model.score_text(text) <= 1.0


class TestFeaturize:
    def test_region_between_markers(self):
        region, distance, negation = featurize("@BAC1$ inhibits @BAC2$.", window=2)
        assert "inhibits" in region
        assert distance == pytest.approx(1.0)
        assert negation == 0.0

    def test_negation_flag(self):
        region, _, negation = featurize("@BAC1$ did not inhibit @BAC2$.")
        assert negation == 1.0

    def test_closest_pair_used(self):
        # two occurrences of marker A; the nearer one defines the window
        _, distance, _ = featurize(
            "@BAC1$ " + "x " * 20 + "@BAC1$ near @BAC2$.", window=10
        )
        assert distance == pytest.approx(2 / 10)


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(12345)
        for _ in range(25):
            n, d = rng.integers(4, 30), rng.integers(2, 12)
            features = rng.normal(size=(n, d))
            labels = rng.integers(0, 2, size=n).astype(float)
            params = rng.normal(size=d + 1)
            _, grad = loss_and_grad(params, features, labels, l2=1e-3)
            eps = 1e-6
            for k in range(d + 1):
                bump = np.zeros(d + 1)
                bump[k] = eps
                hi, _ = loss_and_grad(params + bump, features, labels, l2=1e-3)
                lo, _ = loss_and_grad(params - bump, features, labels, l2=1e-3)
                numeric = (hi - lo) / (2 * eps)
                assert abs(grad[k] - numeric) <= 1e-5 * max(1.0, abs(grad[k]), abs(numeric))


class TestFitBaseline:
    def make_instances(self, n=60, seed=0):
        return make_dataset(smoke_corpus(seed, n))

    def test_separable_set_fits_perfectly(self):
        instances = self.make_instances(80)
        # enumeration oracle: the cue tokens linearly separate the set
        for inst in instances:
            region, _, _ = featurize(inst.tagged_text)
            assert bool(region & CUE_TOKENS) == bool(inst.label)
        model = fit_baseline(instances, seed=1)
        backend = BaselineClassifier(model)
        predictions = [s >= 0.5 for s in backend.score_batch([i.tagged_text for i in instances])]
        assert predictions == [bool(i.label) for i in instances]

    def test_single_class_rejected(self):
        instances = [i for i in self.make_instances(40) if i.label == 1]
        with pytest.raises(DegenerateTraining):
            fit_baseline(instances)

    def test_deterministic_per_seed(self):
        instances = self.make_instances(40)
        first = fit_baseline(instances, seed=7)
        second = fit_baseline(instances, seed=7)
        assert first == second
        other = fit_baseline(instances, seed=8)
        assert other != first


class TestClassify:
    def test_threshold_rules(self):
        class Fixed:
            def __init__(self, value):
                self.value = value

            def score_batch(self, texts):
                return [self.value] * len(texts)

        text = "@BAC1$ and @BAC2$."
        assert classify(text, Fixed(0.9), threshold=0.5) is True
        assert classify(text, Fixed(0.5), threshold=0.5) is True
        assert classify(text, Fixed(0.49), threshold=0.5) is False

    def test_score_requires_markers(self):
        with pytest.raises(MissingMarkers):
            score("no markers", BaselineClassifier())

    def test_config_threshold_bounds(self):
        with pytest.raises(ValueError):
            ClassifierConfig(threshold=0.0)
        with pytest.raises(ValueError):
            ClassifierConfig(threshold=1.0)
        with pytest.raises(ValueError):
            ClassifierConfig(backend="remote")

    def test_model_round_trip(self, tmp_path):
        model = default_baseline()
        path = tmp_path / "model.json"
        save_model(model, path)
        assert load_model(path) == model
        config = ClassifierConfig(model_path=str(path))
        assert isinstance(make_classifier(config), BaselineClassifier)


class _ScoreHandler(BaseHTTPRequestHandler):
    response_body = {}
    status = 200

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        type(self).last_request = json.loads(self.rfile.read(length))
        body = json.dumps(type(self).response_body).encode("utf-8")
        self.send_response(type(self).status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def score_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _ScoreHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _ScoreHandler
    server.shutdown()


class TestRemoteClassifier:
    def test_scores_validated_and_ordered(self, score_server):
        endpoint, handler = score_server
        handler.status = 200
        handler.response_body = {"scores": [0.9, 0.1]}
        backend = RemoteClassifier(endpoint)
        assert backend.score_batch(["@BAC1$ x @BAC2$", "@BAC1$ y @BAC2$"]) == [0.9, 0.1]
        assert handler.last_request == {"instances": ["@BAC1$ x @BAC2$", "@BAC1$ y @BAC2$"]}

    def test_length_mismatch(self, score_server):
        endpoint, handler = score_server
        handler.response_body = {"scores": [0.9]}
        with pytest.raises(ProtocolViolation):
            RemoteClassifier(endpoint).score_batch(["a", "b"])

    def test_out_of_range_score(self, score_server):
        endpoint, handler = score_server
        handler.response_body = {"scores": [1.5]}
        with pytest.raises(ProtocolViolation):
            RemoteClassifier(endpoint).score_batch(["a"])

    def test_transport_error(self):
        with pytest.raises(Transport):
            RemoteClassifier("http://127.0.0.1:1", timeout=0.5).score_batch(["a"])
