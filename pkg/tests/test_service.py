import io
import json
from itertools import combinations

import pytest
from fastapi.testclient import TestClient

from triadscale.model import read_responses_csv
from triadscale.service import build_sequence, create_app, ScheduleConfigModel


def read_responses_csv_text(text):
    return read_responses_csv(io.StringIO(text))


class FakeClock:
    def __init__(self):
        self.t = 1000.0

    def __call__(self):
        return self.t

    def advance_ms(self, ms):
        self.t += ms / 1000.0


def schedule_dict(n=6, n_main=12, n_practice=2, **overrides):
    trios = list(combinations(range(n), 3))
    main = [[j, i, k] for (i, j, k) in trios][:n_main]
    practice = [[i, j, k] for (i, j, k) in trios][:n_practice]
    d = {
        "stimulus_labels": [f"s{i}" for i in range(n)],
        "main_triplets": main,
        "practice_triplets": practice,
        "answer_timeout_ms": 4500,
        "fixation_ms": 300,
        "break_every": 200,
        "shuffle_seed": 0,
    }
    d.update(overrides)
    return d


@pytest.fixture()
def client(tmp_path):
    clock = FakeClock()
    app = create_app(tmp_path / "data", clock=clock)
    with TestClient(app) as c:
        c.clock = clock
        c.data_dir = tmp_path / "data"
        yield c


def start(client, schedule=None, participant="p1"):
    r = client.post("/sessions", json={
        "participant_id": participant,
        "schedule": schedule or schedule_dict(),
    })
    assert r.status_code == 200, r.text
    return r.json()["session_id"]


def answer_next(client, sid, choice="opt1", rt_ms=500):
    q = client.get(f"/sessions/{sid}/next").json()
    if q["kind"] != "question":
        return q
    client.clock.advance_ms(rt_ms)
    r = client.post(f"/sessions/{sid}/answers", json={
        "triplet_index": q["triplet_index"], "choice": choice,
    })
    assert r.status_code == 200, r.text
    return q


class TestBuildSequence:
    def test_practice_first_then_main(self):
        seq = build_sequence(ScheduleConfigModel(**schedule_dict()))
        assert [q.phase for q in seq[:2]] == ["practice", "practice"]
        assert all(q.phase == "main" for q in seq[2:])
        assert len(seq) == 14

    def test_repeat_block_expansion(self):
        sched = ScheduleConfigModel(**schedule_dict(
            n_main=10, repeat_block={"subset_size": 4, "repeats": 3, "shuffle": True},
        ))
        seq = build_sequence(sched)
        main = [q for q in seq if q.phase == "main"]
        assert len(main) == 12
        base = {(q.triplet.ref, q.triplet.opt1, q.triplet.opt2) for q in main}
        assert len(base) == 4  # only the subset, each seen 3 times
        for rep in range(3):
            block = [q for q in main if q.repeat_index == rep]
            assert len(block) == 4
        # shuffled passes differ from each other with this seed
        orders = [
            tuple((q.triplet.ref, q.triplet.opt1, q.triplet.opt2) for q in main if q.repeat_index == rep)
            for rep in range(3)
        ]
        assert len(set(orders)) > 1

    def test_overlap_rejected(self):
        d = schedule_dict()
        d["practice_triplets"] = [d["main_triplets"][0]]
        with pytest.raises(Exception, match="disjoint"):
            build_sequence(ScheduleConfigModel(**d))

    def test_timing_validation(self):
        with pytest.raises(Exception, match="fixation"):
            build_sequence(ScheduleConfigModel(**schedule_dict(answer_timeout_ms=200, fixation_ms=300)))

    def test_subset_too_large(self):
        d = schedule_dict(n_main=3, repeat_block={"subset_size": 5, "repeats": 2})
        with pytest.raises(Exception, match="subset"):
            build_sequence(ScheduleConfigModel(**d))


class TestSessionFlow:
    def test_full_session_and_export(self, client):
        sid = start(client)
        for _ in range(14):
            q = answer_next(client, sid)
            assert q["kind"] == "question"
        done = client.get(f"/sessions/{sid}/next").json()
        assert done["kind"] == "done"
        csv_text = client.get(done["export"]).text
        rows = read_responses_csv_text(csv_text)
        assert len(rows) == 12  # practice excluded by default
        assert all(r.answer == +1 for r in rows)
        with_practice = client.get(f"/sessions/{sid}/export?include_practice=true").text
        assert len(read_responses_csv_text(with_practice)) == 14

    def test_question_payload(self, client):
        sid = start(client)
        q = client.get(f"/sessions/{sid}/next").json()
        assert q["kind"] == "question"
        assert q["phase"] == "practice"
        assert q["deadline_ms"] == 4500 and q["fixation_ms"] == 300
        assert q["progress"] == {"answered": 0, "total": 14}

    def test_answer_choice_mapping(self, client):
        sid = start(client)
        answer_next(client, sid, choice="opt1")
        answer_next(client, sid, choice="opt2")
        state = client.get(f"/sessions/{sid}/state").json()
        assert state["responses"] == 2
        csv_text = client.get(f"/sessions/{sid}/export?include_practice=true").text
        rows = read_responses_csv_text(csv_text)
        assert rows[0].answer == 1 and rows[1].answer == -1
        assert rows[0].rt_ms == pytest.approx(500.0)

    def test_outstanding_conflict(self, client):
        sid = start(client)
        client.get(f"/sessions/{sid}/next")
        r = client.get(f"/sessions/{sid}/next")
        assert r.status_code == 409

    def test_wrong_index_conflict(self, client):
        sid = start(client)
        client.get(f"/sessions/{sid}/next")
        r = client.post(f"/sessions/{sid}/answers", json={"triplet_index": 5, "choice": "opt1"})
        assert r.status_code == 409

    def test_answer_without_question(self, client):
        sid = start(client)
        r = client.post(f"/sessions/{sid}/answers", json={"triplet_index": 0, "choice": "opt1"})
        assert r.status_code == 409

    def test_duplicate_active_participant_rejected(self, client):
        start(client, participant="dup")
        r = client.post("/sessions", json={
            "participant_id": "dup", "schedule": schedule_dict(),
        })
        assert r.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/deadbeef/next").status_code == 404


class TestTimeout:
    def test_late_answer_stored_unanswered(self, client):
        sid = start(client)
        q = client.get(f"/sessions/{sid}/next").json()
        client.clock.advance_ms(4600)
        r = client.post(f"/sessions/{sid}/answers", json={
            "triplet_index": q["triplet_index"], "choice": "opt1",
        })
        assert r.json()["recorded"] == "unanswered"
        csv_text = client.get(f"/sessions/{sid}/export?include_practice=true").text
        rows = read_responses_csv_text(csv_text)
        assert rows[0].answer is None and rows[0].rt_ms is None

    def test_on_time_answer_recorded(self, client):
        sid = start(client)
        q = client.get(f"/sessions/{sid}/next").json()
        client.clock.advance_ms(4400)
        r = client.post(f"/sessions/{sid}/answers", json={
            "triplet_index": q["triplet_index"], "choice": "opt2",
        })
        assert r.json()["recorded"] == "answered"

    def test_abandoned_question_resolved_on_next(self, client):
        sid = start(client)
        client.get(f"/sessions/{sid}/next")
        client.clock.advance_ms(5000)
        q2 = client.get(f"/sessions/{sid}/next").json()
        assert q2["kind"] == "question" and q2["triplet_index"] == 1
        state = client.get(f"/sessions/{sid}/state").json()
        assert state["responses"] == 1

    def test_unanswered_filterable_in_export(self, client):
        sid = start(client)
        q = client.get(f"/sessions/{sid}/next").json()
        client.clock.advance_ms(5000)
        client.post(f"/sessions/{sid}/answers", json={
            "triplet_index": q["triplet_index"], "choice": "opt1",
        })
        answer_next(client, sid)
        url = f"/sessions/{sid}/export?include_practice=true"
        assert len(read_responses_csv_text(client.get(url).text)) == 2
        assert len(read_responses_csv_text(client.get(url + "&include_unanswered=false").text)) == 1


class TestBreaks:
    def test_break_after_every_n_main(self, client):
        sched = schedule_dict(n=8, n_main=12, n_practice=2, break_every=5)
        sid = start(client, schedule=sched)
        kinds = []
        while True:
            q = client.get(f"/sessions/{sid}/next").json()
            kinds.append(q["kind"])
            if q["kind"] == "done":
                break
            if q["kind"] == "question":
                client.clock.advance_ms(400)
                client.post(f"/sessions/{sid}/answers", json={
                    "triplet_index": q["triplet_index"], "choice": "opt1",
                })
        # 2 practice + 12 main questions, breaks before main #5 and #10
        assert kinds.count("question") == 14
        assert kinds.count("break") == 2
        q_positions = [i for i, k in enumerate(kinds) if k == "break"]
        assert q_positions == [7, 13]  # after 2+5 and 2+10 questions


class TestJournalReplay:
    def test_restart_reconstructs_state(self, client, tmp_path):
        sid = start(client)
        for _ in range(5):
            answer_next(client, sid)
        before = client.get(f"/sessions/{sid}/state").json()
        export_before = client.get(f"/sessions/{sid}/export?include_practice=true").text

        app2 = create_app(client.data_dir, clock=client.clock)
        with TestClient(app2) as c2:
            after = c2.get(f"/sessions/{sid}/state").json()
            assert after == before
            assert c2.get(f"/sessions/{sid}/export?include_practice=true").text == export_before
            # session continues seamlessly
            q = c2.get(f"/sessions/{sid}/next").json()
            assert q["kind"] == "question" and q["triplet_index"] == 5

    def test_journal_is_json_lines(self, client):
        sid = start(client)
        answer_next(client, sid)
        lines = (client.data_dir / "journal.jsonl").read_text().splitlines()
        events = [json.loads(l) for l in lines]
        assert events[0]["type"] == "create"
        assert events[1]["type"] == "resolve"
        assert events[1]["answer"] == 1
