from __future__ import annotations

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from lextree.service import AuthConfig, create_app
from lextree.store import Corpus, Status

from conftest import agent_reply, draft_reply, make_sample


@pytest.fixture
def corpus(tmp_path):
    return Corpus(tmp_path / "corpus.jsonl")


@pytest.fixture
def client(corpus):
    return TestClient(create_app(corpus))


def seed_queued(corpus, n=1):
    ids = []
    for _ in range(n):
        sample = make_sample(status=Status.QUEUED)
        corpus.append_sample(sample)
        ids.append(sample.id)
    return ids


def good_verdict(annotator="alice"):
    return {
        "annotator_id": annotator,
        "relevant": True,
        "well_formalized": True,
        "logically_sound": True,
        "category": "Good",
        "notes": "",
    }


class TestSamples:
    def test_list_with_filters(self, corpus, client):
        seed_queued(corpus, 2)
        corpus.append_sample(make_sample(status=Status.DRAFTED, article="GDPR Art. 7"))
        assert client.get("/samples").json()["total"] == 3
        assert client.get("/samples", params={"status": "Queued"}).json()["total"] == 2
        assert client.get("/samples", params={"article": "GDPR Art. 7"}).json()["total"] == 1
        assert client.get("/samples", params={"status": "bogus"}).status_code == 422

    def test_get_includes_fresh_trace(self, corpus, client):
        (sid,) = seed_queued(corpus)
        body = client.get(f"/samples/{sid}").json()
        assert body["id"] == sid
        trace = {e["predicate"]: e for e in body["trace"]}
        assert trace["gdpr_art20_data_portability"]["kind"] == "derived"
        assert trace["gdpr_art20_data_portability"]["value"] is True

    def test_get_missing_is_404(self, client):
        assert client.get("/samples/nope").status_code == 404


class TestQueue:
    def test_two_annotators_get_distinct_samples(self, corpus, client):
        seed_queued(corpus, 2)
        a = client.get("/queue/next", params={"annotator": "alice"}).json()
        b = client.get("/queue/next", params={"annotator": "bob"}).json()
        assert a["sample"]["id"] != b["sample"]["id"]

    def test_empty_queue_is_404(self, client):
        assert client.get("/queue/next", params={"annotator": "alice"}).status_code == 404

    def test_race_on_queue_next_yields_distinct_assignments(self, corpus):
        ids = set(seed_queued(corpus, 16))
        app = create_app(corpus)
        results = []
        barrier = threading.Barrier(16)

        def grab(i):
            with TestClient(app) as c:
                barrier.wait()
                r = c.get("/queue/next", params={"annotator": f"ann-{i}"})
                results.append(r.json()["sample"]["id"])

        threads = [threading.Thread(target=grab, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(results) == 16
        assert set(results) == ids


class TestVerdict:
    def test_assignee_can_submit(self, corpus, client):
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"})
        resp = client.post(f"/samples/{sid}/verdict", json=good_verdict("alice"))
        assert resp.status_code == 200
        assert resp.json()["status"] == "HumanVerified"

    def test_non_assignee_gets_409(self, corpus, client):
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"})
        resp = client.post(f"/samples/{sid}/verdict", json=good_verdict("mallory"))
        assert resp.status_code == 409

    def test_unassigned_sample_gets_409(self, corpus, client):
        (sid,) = seed_queued(corpus)
        assert client.post(f"/samples/{sid}/verdict", json=good_verdict()).status_code == 409

    def test_good_with_failed_criterion_gets_422(self, corpus, client):
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"})
        bad = good_verdict("alice") | {"logically_sound": False}
        assert client.post(f"/samples/{sid}/verdict", json=bad).status_code == 422

    def test_concurrent_double_verdict_one_wins(self, corpus):
        (sid,) = seed_queued(corpus)
        app = create_app(corpus)
        with TestClient(app) as c:
            c.get("/queue/next", params={"annotator": "alice"})
        statuses = []
        barrier = threading.Barrier(2)

        def submit():
            with TestClient(app) as c:
                barrier.wait()
                statuses.append(
                    c.post(f"/samples/{sid}/verdict", json=good_verdict("alice")).status_code
                )

        threads = [threading.Thread(target=submit) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409]


class TestMeta:
    def seed_verified(self, corpus, client):
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"})
        client.post(f"/samples/{sid}/verdict", json=good_verdict("alice"))
        return sid

    def test_overturn_renders_bad(self, corpus, client):
        sid = self.seed_verified(corpus, client)
        resp = client.post(
            f"/samples/{sid}/meta",
            json={"reviewer_id": "rev", "decision": "Overturn", "rationale": "scope leak"},
        )
        assert resp.status_code == 200
        assert resp.json()["category"] == "Bad"
        assert resp.json()["status"] == "MetaReviewed"

    def test_meta_before_verdict_is_409(self, corpus, client):
        (sid,) = seed_queued(corpus)
        resp = client.post(
            f"/samples/{sid}/meta", json={"reviewer_id": "rev", "decision": "Confirm"}
        )
        assert resp.status_code == 409


class TestAuth:
    def test_tokens_enforced(self, corpus):
        seed_queued(corpus)
        auth = AuthConfig(tokens={"tok-alice": ("annotator", "alice"), "tok-meta": ("meta", "rev")})
        client = TestClient(create_app(corpus, auth=auth))
        assert client.get("/queue/next", params={"annotator": "alice"}).status_code == 401
        ok = client.get(
            "/queue/next", params={"annotator": "alice"}, headers={"X-Auth-Token": "tok-alice"}
        )
        assert ok.status_code == 200
        # Wrong identity for the token.
        assert (
            client.get(
                "/queue/next", params={"annotator": "bob"}, headers={"X-Auth-Token": "tok-alice"}
            ).status_code
            == 403
        )

    def test_meta_requires_meta_role(self, corpus):
        auth = AuthConfig(tokens={"tok-alice": ("annotator", "alice"), "tok-meta": ("meta", "rev")})
        app = create_app(corpus, auth=auth)
        client = TestClient(app)
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"}, headers={"X-Auth-Token": "tok-alice"})
        client.post(
            f"/samples/{sid}/verdict",
            json=good_verdict("alice"),
            headers={"X-Auth-Token": "tok-alice"},
        )
        deny = client.post(
            f"/samples/{sid}/meta",
            json={"reviewer_id": "rev", "decision": "Confirm"},
            headers={"X-Auth-Token": "tok-alice"},
        )
        assert deny.status_code == 403
        ok = client.post(
            f"/samples/{sid}/meta",
            json={"reviewer_id": "rev", "decision": "Confirm"},
            headers={"X-Auth-Token": "tok-meta"},
        )
        assert ok.status_code == 200


class TestExportStats:
    def test_export_streams_curated_only(self, corpus, client):
        (sid,) = seed_queued(corpus)
        client.get("/queue/next", params={"annotator": "alice"})
        client.post(f"/samples/{sid}/verdict", json=good_verdict("alice"))
        client.post(f"/samples/{sid}/meta", json={"reviewer_id": "rev", "decision": "Confirm"})
        seed_queued(corpus)  # second sample stays queued
        lines = [l for l in client.get("/export").text.splitlines() if l]
        assert len(lines) == 1
        assert json.loads(lines[0])["id"] == sid

    def test_stats_passthrough(self, corpus, client):
        seed_queued(corpus, 3)
        body = client.get("/stats").json()
        assert body["total"] == 3
        assert body["by_status"] == {"Queued": 3}


class TestPipelineEndpoints:
    def test_mock_run_appends_sample(self, corpus, client):
        transcript = [draft_reply(), agent_reply(90), agent_reply(90)]
        resp = client.post(
            "/pipeline/run", json={"article": "GDPR Art. 20", "mock_transcript": transcript}
        )
        assert resp.status_code == 200
        run_id = resp.json()["run_id"]
        for _ in range(100):
            body = client.get(f"/pipeline/runs/{run_id}").json()
            if body["status"] != "running":
                break
            time.sleep(0.05)
        assert body["status"] == "done"
        assert body["sample_id"] is not None
        assert body["history"]["outcome"] == "Accepted(0)"
        assert corpus.get(body["sample_id"]).status is Status.AUTO_VERIFIED

    def test_run_without_agents_is_422(self, client):
        assert client.post("/pipeline/run", json={"article": "x"}).status_code == 422

    def test_unknown_run_is_404(self, client):
        assert client.get("/pipeline/runs/nope").status_code == 404
