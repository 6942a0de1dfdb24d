import pytest

fastapi = pytest.importorskip("fastapi")
from fastapi.testclient import TestClient  # noqa: E402

from model_sidecar.app import create_app  # noqa: E402
from model_sidecar.backends import ToyBackend, banned_forms  # noqa: E402


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(ToyBackend()))


@pytest.fixture(scope="module")
def down():
    return TestClient(create_app(None))


def _define_body(items, max_new_tokens=32):
    return {"items": items, "decoding": "greedy",
            "max_new_tokens": max_new_tokens}


def test_health(client):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["status"] == "ok"
    assert payload["generator_id"] == "toy-greedy-v1"
    assert payload["dim"] == 96


def test_define_empty_items(client):
    resp = client.post("/v1/define", json=_define_body([]))
    assert resp.status_code == 200
    assert resp.json()["items"] == []


def test_define_order_and_count(client):
    items = [{"id": f"u{i}", "prompt": f"context {i} What is the definition "
              "of word?", "banned_word": "word"} for i in range(5)]
    resp = client.post("/v1/define", json=_define_body(items))
    assert resp.status_code == 200
    payload = resp.json()
    assert [it["id"] for it in payload["items"]] == [f"u{i}" for i in range(5)]
    assert all(it["definition"].strip() for it in payload["items"])


def test_define_banned_word_absent(client):
    items = [{"id": "u1",
              "prompt": "He kept his word. What is the definition of word?",
              "banned_word": "word"}]
    resp = client.post("/v1/define", json=_define_body(items))
    tokens = resp.json()["items"][0]["definition"].lower().split()
    assert "word" not in tokens


def test_define_deterministic(client):
    items = [{"id": "u1", "prompt": "a fixed prompt", "banned_word": "fixed"}]
    first = client.post("/v1/define", json=_define_body(items)).json()
    second = client.post("/v1/define", json=_define_body(items)).json()
    assert first == second


def test_define_rejects_non_greedy(client):
    body = _define_body([])
    body["decoding"] = "sampling"
    assert client.post("/v1/define", json=body).status_code == 400


def test_define_malformed(client):
    resp = client.post("/v1/define", json={"items": [{"prompt": "x"}]})
    assert resp.status_code == 400


def test_embed_texts(client):
    resp = client.post("/v1/embed", json={"subject": "definition",
                                          "texts": ["a", "b", "a"]})
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["dim"] == 96
    assert len(payload["vectors"]) == 3
    assert payload["vectors"][0] == payload["vectors"][2]
    assert payload["vectors"][0] != payload["vectors"][1]


def test_embed_unit_norm(client):
    payload = client.post("/v1/embed", json={
        "subject": "sentence", "texts": ["some sentence here"]}).json()
    norm = sum(x * x for x in payload["vectors"][0]) ** 0.5
    assert norm == pytest.approx(1.0, abs=1e-6)


def test_embed_token_span(client):
    context = "He kept his word and returned."
    resp = client.post("/v1/embed", json={
        "subject": "token-span",
        "items": [{"context": context, "start": 12, "end": 16}]})
    assert resp.status_code == 200
    assert len(resp.json()["vectors"]) == 1


def test_embed_span_out_of_bounds(client):
    resp = client.post("/v1/embed", json={
        "subject": "token-span",
        "items": [{"context": "short", "start": 2, "end": 99}]})
    assert resp.status_code == 400


def test_embed_unknown_subject(client):
    resp = client.post("/v1/embed", json={"subject": "paragraph",
                                          "texts": ["x"]})
    assert resp.status_code == 400


def test_embed_missing_texts(client):
    resp = client.post("/v1/embed", json={"subject": "definition"})
    assert resp.status_code == 400


def test_unavailable_backend(down):
    assert down.get("/v1/health").status_code == 503
    assert down.post("/v1/define",
                     json=_define_body([])).status_code == 503
    assert down.post("/v1/embed", json={"subject": "definition",
                                        "texts": []}).status_code == 503


def test_banned_forms_default_exact():
    assert banned_forms("Word") == {"word"}


def test_banned_forms_expanded():
    forms = banned_forms("carry", expand_inflections=True)
    assert {"carry", "carrys", "carries", "carried", "carrying"} <= forms
