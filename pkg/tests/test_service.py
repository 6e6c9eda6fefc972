import io
import json
import threading

import pytest
from fastapi.testclient import TestClient

from conftest import write_jsonl
from drdistill import dc, qa
from drdistill.corpus import load_corpus
from drdistill.service import ServiceConfig, create_app
from drdistill.taxonomy import default_vocabulary

vocab = default_vocabulary()
ADMIN = "test-admin-token"


@pytest.fixture
def client(tmp_path):
    items = [{"item_id": f"item-{i:02d}", "genre": "wikipedia",
              "s1": f"Sentence one {i}.", "s2": f"Sentence two {i}.",
              "reference": ["conjunction"]} for i in range(25)]
    write_jsonl(tmp_path / "items.jsonl", items)
    (tmp_path / "workers.json").write_text(json.dumps(["w1", "w2"]), "utf-8")
    config = ServiceConfig(
        data_dir=tmp_path / "data", items_file=tmp_path / "items.jsonl",
        workers_file=tmp_path / "workers.json", admin_token=ADMIN)
    app = create_app(config)
    return TestClient(app)


def new_session(client, worker="w1", method="dc"):
    r = client.post("/sessions", json={"worker_id": worker, "method": method})
    assert r.status_code == 200, r.text
    return r.json()


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body["status"] == "ok"
    assert body["items"] == 25
    assert body["bank_version"]


def test_create_session(client):
    body = new_session(client)
    assert body["method"] == "dc"
    assert body["batch_size"] == 20
    assert len(body["token"]) == 32  # 128-bit hex


def test_unknown_worker(client):
    r = client.post("/sessions", json={"worker_id": "ghost", "method": "dc"})
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownWorker"


def test_two_methods_isolated_queues(client):
    a = new_session(client, method="dc")
    b = new_session(client, method="qa")
    assert a["token"] != b["token"]


def test_next_item_redacts_reference(client):
    token = new_session(client)["token"]
    item = client.get(f"/sessions/{token}/next").json()
    assert item["position"] == 1 and item["total"] == 20
    assert "reference" not in item
    assert "reference" not in json.dumps(item)


def test_bad_token(client):
    r = client.get("/sessions/deadbeef/next")
    assert r.status_code == 401
    assert r.json()["code"] == "SessionExpired"


def complete_dc_item(client, token, connective="however", choice="despite this"):
    item = client.get(f"/sessions/{token}/next").json()
    r1 = client.post(f"/sessions/{token}/dc/step1", json={"connective": connective})
    assert r1.status_code == 200
    r2 = client.post(f"/sessions/{token}/dc/step2", json={"choice": choice})
    assert r2.status_code == 200, r2.text
    return item, r1.json(), r2.json()


def test_dc_flow(client):
    token = new_session(client)["token"]
    item, step1_resp, step2_resp = complete_dc_item(client, token)
    assert step1_resp["options"] == ["on the contrary", "despite", "despite this"]
    assert step2_resp == {"status": "recorded", "item_id": item["item_id"]}
    # sense labels never appear in annotator-facing responses
    for resp in (item, step1_resp, step2_resp):
        text = json.dumps(resp)
        for label in vocab.labels:
            assert label not in text


def test_dc_unmatched_connective_default_list(client):
    token = new_session(client)["token"]
    client.get(f"/sessions/{token}/next")
    r = client.post(f"/sessions/{token}/dc/step1", json={"connective": "zzz"})
    assert len(r.json()["options"]) == 12


def test_dc_step2_duplicate_rejected(client):
    token = new_session(client)["token"]
    complete_dc_item(client, token)
    r = client.post(f"/sessions/{token}/dc/step2", json={"choice": "despite this"})
    assert r.status_code == 409


def test_dc_choice_not_in_list(client):
    token = new_session(client)["token"]
    client.get(f"/sessions/{token}/next")
    client.post(f"/sessions/{token}/dc/step1", json={"connective": "however"})
    r = client.post(f"/sessions/{token}/dc/step2", json={"choice": "in addition"})
    assert r.status_code == 422
    assert r.json()["code"] == "ChoiceNotInList"


def test_qa_flow_and_batch_complete(client):
    token = new_session(client, method="qa")["token"]
    done = []
    for i in range(20):
        item = client.get(f"/sessions/{token}/next").json()
        r = client.post(f"/sessions/{token}/qa", json={
            "question_source": "s1", "prefix": "What is the result of",
            "question_text": f"What is the result of thing {i}?"})
        assert r.status_code == 200
        done.append(item["item_id"])
    r = client.get(f"/sessions/{token}/next")
    assert r.status_code == 410
    assert r.json()["code"] == "BatchComplete"
    assert len(set(done)) == 20  # no item served twice


def test_same_worker_never_gets_item_twice(client):
    token = new_session(client, method="qa")["token"]
    first = []
    for _ in range(20):
        item = client.get(f"/sessions/{token}/next").json()
        first.append(item["item_id"])
        client.post(f"/sessions/{token}/qa", json={
            "question_source": "s1", "prefix": "After what"})
    token2 = new_session(client, method="qa")["token"]
    item = client.get(f"/sessions/{token2}/next").json()
    assert item["item_id"] not in first
    assert item["total"] == 5  # only 5 of 25 items remain


def test_export_requires_admin(client):
    assert client.get("/admin/export").status_code == 401
    r = client.get("/admin/export", headers={"Authorization": f"Bearer {ADMIN}"})
    assert r.status_code == 200
    assert r.text == ""  # empty store exports an empty, valid file


def test_export_round_trip_and_engine_parity(client, tmp_path):
    token = new_session(client)["token"]
    complete_dc_item(client, token)
    complete_dc_item(client, token, "consequently", "consequently")
    qtoken = new_session(client, worker="w2", method="qa")["token"]
    client.get(f"/sessions/{qtoken}/next")
    client.post(f"/sessions/{qtoken}/qa", json={
        "question_source": "s1", "prefix": "What is the result of"})

    headers = {"Authorization": f"Bearer {ADMIN}"}
    exported = client.get("/admin/export", headers=headers).text
    items_file = tmp_path / "items.jsonl"
    corpus = load_corpus(items_file, io.StringIO(exported))
    assert len(corpus.votes) == 3
    bank = dc.load_bank()
    inventory = qa.load_inventory()
    for v in corpus.votes:
        if v.method == "dc":
            assert dc.map_dc_vote(v.raw, bank) == v.sense
            assert v.raw["bank_version"] == bank.version
        else:
            assert qa.map_qa_vote(v.raw, inventory) == v.sense
            assert v.raw["inventory_version"] == inventory.version

    only_qa = client.get("/admin/export?method=qa", headers=headers).text
    assert all(json.loads(l)["method"] == "qa" for l in only_qa.splitlines())
    assert len(only_qa.splitlines()) == 1


def test_vote_log_survives_restart(client, tmp_path):
    token = new_session(client)["token"]
    complete_dc_item(client, token)
    config = ServiceConfig(
        data_dir=tmp_path / "data", items_file=tmp_path / "items.jsonl",
        workers_file=tmp_path / "workers.json", admin_token=ADMIN)
    client2 = TestClient(create_app(config))
    r = client2.get("/admin/export", headers={"Authorization": f"Bearer {ADMIN}"})
    assert len(r.text.splitlines()) == 1


def test_no_duplicate_votes_under_racing_requests(client):
    token = new_session(client, method="qa")["token"]
    client.get(f"/sessions/{token}/next")
    statuses = []
    lock = threading.Lock()

    def submit():
        r = client.post(f"/sessions/{token}/qa", json={
            "question_source": "s1", "prefix": "What is the reason"})
        with lock:
            statuses.append(r.status_code)

    threads = [threading.Thread(target=submit) for _ in range(50)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    exported = client.get("/admin/export",
                          headers={"Authorization": f"Bearer {ADMIN}"}).text
    # exactly one vote persisted no matter the interleaving
    assert len(exported.splitlines()) <= 20
    by_key = {}
    for line in exported.splitlines():
        rec = json.loads(line)
        key = (rec["item_id"], rec["worker_id"], rec["method"])
        assert key not in by_key
        by_key[key] = rec
    assert statuses.count(200) == len(by_key)
