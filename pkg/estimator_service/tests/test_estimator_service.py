import json
import random
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from estimator_service import (
    LabeledRow,
    LinearBeliefModel,
    create_app,
    featurize,
    make_synthetic_dataset,
    read_rows,
    split_rows,
    train,
    write_rows,
)
from estimator_service.cli import EXIT_CONFIG, EXIT_OK, main
from estimator_service.data import DataFileError


@pytest.fixture(scope="module")
def trained():
    rows = make_synthetic_dataset(600, seed=1)
    train_rows, held_rows = split_rows(rows, 0.2, seed=1)
    return train(train_rows), train_rows, held_rows


# ---------------------------------------------------------------------------
# Features and model
# ---------------------------------------------------------------------------


def test_featurize_stable_and_normalized():
    a = featurize("ctx words", "event words", "self_truth")
    b = featurize("ctx words", "event words", "self_truth")
    assert np.array_equal(a, b)
    assert np.isclose(np.linalg.norm(a), 1.0)
    assert not np.array_equal(a, featurize("ctx words", "event words", "opponent_knows"))
    with pytest.raises(ValueError):
        featurize("x", "y", "z", dim=1)


def test_overlap_features_distinguish_mentions():
    mentioned = featurize("they said Kent State", "School is Kent State", "self_truth")
    unmentioned = featurize("they said Fordham", "School is Kent State", "self_truth")
    assert not np.array_equal(mentioned, unmentioned)


def test_synthetic_held_out_accuracy(trained):
    model, _, held_rows = trained
    assert model.accuracy(held_rows) >= 0.95


def test_training_refuses_single_class():
    rows = [LabeledRow("c", "e", "self_truth", True) for _ in range(10)]
    with pytest.raises(DataFileError):
        train(rows)


def test_training_deterministic_artifact(tmp_path):
    rows = make_synthetic_dataset(100, seed=3)
    paths = [tmp_path / "a.npz", tmp_path / "b.npz"]
    for path in paths:
        train(rows, dim=512, epochs=50).save(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    loaded = LinearBeliefModel.load(paths[0])
    assert loaded.dim == 512
    assert loaded.metadata["n_examples"] == 100


def test_probabilities_in_range(trained):
    model, train_rows, _ = trained
    probs = model.predict_proba([(r.context, r.event, r.perspective) for r in train_rows[:50]])
    assert np.all((probs >= 0.0) & (probs <= 1.0))


# ---------------------------------------------------------------------------
# Data IO
# ---------------------------------------------------------------------------


def test_rows_round_trip_and_errors(tmp_path):
    rows = make_synthetic_dataset(10, seed=0)
    path = tmp_path / "rows.jsonl"
    write_rows(rows, path)
    assert read_rows(path) == rows
    bad = tmp_path / "bad.jsonl"
    bad.write_text(rows[0].to_json() + "\nnot json\n")
    with pytest.raises(DataFileError, match=":2:"):
        read_rows(bad)
    weird = tmp_path / "weird.jsonl"
    weird.write_text(json.dumps({"context": "c", "event": "e", "perspective": "psychic", "label": 1}))
    with pytest.raises(DataFileError, match="psychic"):
        read_rows(weird)


def test_split_rows_deterministic():
    rows = make_synthetic_dataset(50, seed=2)
    a = split_rows(rows, 0.2, seed=9)
    b = split_rows(rows, 0.2, seed=9)
    assert a == b
    assert split_rows(rows, 0.2, seed=10) != a


# ---------------------------------------------------------------------------
# HTTP protocol
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def client(trained):
    return TestClient(create_app(trained[0]))


def test_health_reports_model_metadata(client):
    doc = client.get("/health").json()
    assert doc["status"] == "ok"
    assert doc["model"]["n_examples"] > 0
    assert "data_fingerprint" in doc["model"]


def test_estimate_endpoint_shape(client):
    body = {"context": "A: hi", "events": ["e0", "e1", "e2"], "perspective": "self_truth"}
    doc = client.post("/estimate", json=body).json()
    assert len(doc["probabilities"]) == 3
    assert all(0.0 <= p <= 1.0 for p in doc["probabilities"])


def test_estimate_rejects_bad_requests(client):
    bad_persp = {"context": "c", "events": ["e"], "perspective": "psychic"}
    assert client.post("/estimate", json=bad_persp).status_code == 422
    empty = {"context": "c", "events": [], "perspective": "self_truth"}
    assert client.post("/estimate", json=empty).status_code == 422
    assert client.post("/estimate", json={"context": "c"}).status_code == 422


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_train_evaluate_cycle(tmp_path, capsys):
    data = tmp_path / "data.jsonl"
    model_path = tmp_path / "model.npz"
    assert main(["gen-synthetic", "--n", "600", "--out", str(data), "--seed", "4"]) == EXIT_OK
    capsys.readouterr()
    assert main(["train", "--data", str(data), "--out", str(model_path)]) == EXIT_OK
    meta = json.loads(capsys.readouterr().out)
    assert meta["held_out_accuracy"] >= 0.95
    assert main(["evaluate", "--model", str(model_path), "--data", str(data)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["accuracy"] >= 0.95


def test_cli_refuses_single_class(tmp_path):
    data = tmp_path / "one.jsonl"
    write_rows([LabeledRow("c", "e", "self_truth", True)] * 8, data)
    out = tmp_path / "m.npz"
    assert main(["train", "--data", str(data), "--out", str(out), "--held-out", "0"]) == EXIT_CONFIG
    assert main(["train", "--data", str(tmp_path / "missing"), "--out", str(out)]) == EXIT_CONFIG


# ---------------------------------------------------------------------------
# Conformance against the consumer's client (the only cross-package tests;
# the service itself never imports the experiment framework)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def live_endpoint(trained):
    import uvicorn

    app = create_app(trained[0])
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}/estimate"
    server.should_exit = True
    thread.join(timeout=5)


def test_consumer_client_fuzz_conformance(live_endpoint):
    beda = pytest.importorskip("beda")
    from beda.beliefs import (
        DialogueContext,
        EstimatorClientConfig,
        Event,
        Perspective,
        WorldSet,
        remote_estimate,
    )

    rng = random.Random(0)
    vocab = "alpha beta gamma delta kent state fordham art rock climbing".split()
    config = EstimatorClientConfig(live_endpoint)
    for _ in range(500):
        n_events = rng.randint(1, 8)
        events = WorldSet(
            tuple(
                Event(i, " ".join(rng.choices(vocab, k=rng.randint(1, 6))))
                for i in range(n_events)
            )
        )
        context = DialogueContext(task="t")
        for _ in range(rng.randint(0, 4)):
            context = context.with_turn("A", " ".join(rng.choices(vocab, k=rng.randint(1, 8))))
        perspective = rng.choice(list(Perspective))
        vector = remote_estimate(config, context, events, perspective)
        assert vector.world_set_size == n_events
        assert all(0.0 <= v <= 1.0 for v in vector.values)
    assert beda  # imported successfully


def test_accuracy_parity_with_consumer_evaluator(trained):
    pytest.importorskip("beda")
    from beda.beliefs import LabeledExample, Perspective, evaluate_estimator

    model, _, held_rows = trained
    examples = [
        LabeledExample(r.context, r.event, Perspective(r.perspective), r.label)
        for r in held_rows
    ]

    def predict(example):
        return float(
            model.predict_proba([(example.context, example.event, example.perspective.value)])[0]
        )

    consumer = evaluate_estimator(predict, examples)["accuracy"]
    own = model.accuracy(held_rows)
    assert abs(consumer - own) < 1e-9
