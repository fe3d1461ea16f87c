"""HTTP service: session lifecycle, long-poll events, feedback queueing, memory views."""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request

import pytest

from lyra.config import load_config
from lyra.memory import MemoryStore
from lyra.service import make_server
from lyra.tasklib import seed_memory
from lyra.tasklib.plans import plan_build_house, plan_stack_blocks
from lyra.world import WorldSnapshot


@pytest.fixture()
def service(tmp_path):
    memory_dir = tmp_path / "memory"
    seed_memory(MemoryStore(memory_dir))
    server, state = make_server(
        0, load_config(), memory_dir=str(memory_dir), long_poll_seconds=2.0
    )
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server.server_address[1], state
    server.shutdown()


def request(port: int, method: str, path: str, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}",
        data=data,
        method=method,
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            payload = resp.read().decode()
            return resp.status, json.loads(payload) if payload else None
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode() or "null")


def house_session_body(seed: int = 99) -> dict:
    return {
        "mode": "solve",
        "instruction": "build a house",
        "seed": seed,
        "scene": {"name": "house", "seed": seed},
        "agent_script": [
            {"expect_kind": "task_code", "response_text": plan_build_house()},
            {"expect_kind": "task_code", "response_text": plan_build_house()},
        ],
    }


def drive_until(port, sid, cursor, predicate, limit=100):
    page = None
    for _ in range(limit):
        _, page = request(port, "GET", f"/api/session/{sid}/events?since={cursor}")
        cursor = page["next"]
        if predicate(page):
            return cursor, page
    raise AssertionError(f"predicate never satisfied; last page {page}")


def test_session_accept_flow(service) -> None:
    port, _ = service
    status, handle = request(port, "POST", "/api/session", house_session_body())
    assert status == 201
    assert handle["phase"] == "solve"
    sid = handle["id"]

    cursor, page = drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    status, _ = request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    assert status == 204
    cursor, page = drive_until(port, sid, cursor, lambda p: p["status"] in ("done", "failed"))
    assert page["status"] == "done"

    status, summary = request(port, "GET", f"/api/session/{sid}")
    assert status == 200
    assert summary["status"] == "done"
    assert summary["latest"]["digest"]


def test_correction_then_accept_recorded_in_order(service) -> None:
    port, _ = service
    _, handle = request(port, "POST", "/api/session", house_session_body(seed=123))
    sid = handle["id"]
    cursor, _ = drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    request(
        port, "POST", f"/api/session/{sid}/feedback",
        {"kind": "correction", "text": "align the tiles"},
    )
    cursor, _ = drive_until(port, sid, cursor, lambda p: p["status"] == "awaiting_feedback")
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    drive_until(port, sid, cursor, lambda p: p["status"] in ("done", "failed"))

    _, page = request(port, "GET", f"/api/session/{sid}/events?since=0")
    feedback = [e for e in page["events"] if e["type"] == "feedback"]
    assert [e["kind"] for e in feedback] == ["correction", "accept"]
    assert feedback[0]["text"] == "align the tiles"
    seqs = [e["seq"] for e in page["events"]]
    assert seqs == sorted(seqs)


def test_world_endpoint_matches_snapshot_encoder(service) -> None:
    port, state = service
    _, handle = request(port, "POST", "/api/session", house_session_body(seed=77))
    sid = handle["id"]
    drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")

    req = urllib.request.Request(f"http://127.0.0.1:{port}/api/world/{sid}")
    with urllib.request.urlopen(req, timeout=10) as resp:
        raw = resp.read().decode()
    # the payload is the canonical snapshot encoding: decode -> re-encode is identity
    assert WorldSnapshot.decode(raw).encode() == raw
    runner = state.get(sid)
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    drive_until(port, sid, 0, lambda p: p["status"] in ("done", "failed"))
    assert runner.world_snapshot is not None


def test_unknown_session_404(service) -> None:
    port, _ = service
    status, body = request(port, "GET", "/api/session/doesnotexist")
    assert status == 404
    assert body["code"] == "no_such_session"


def test_feedback_in_wrong_state_409(service) -> None:
    port, _ = service
    _, handle = request(port, "POST", "/api/session", house_session_body(seed=5))
    sid = handle["id"]
    cursor, _ = drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    drive_until(port, sid, cursor, lambda p: p["status"] in ("done", "failed"))
    status, body = request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    assert status == 409
    assert body["code"] == "not_awaiting_feedback"


def test_bad_feedback_kind_400(service) -> None:
    port, _ = service
    _, handle = request(port, "POST", "/api/session", house_session_body(seed=6))
    sid = handle["id"]
    drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    status, body = request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "maybe"})
    assert status == 400 and body["code"] == "bad_feedback"
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})


def test_memory_views(service) -> None:
    port, _ = service
    status, skills = request(port, "GET", "/api/skills")
    assert status == 200 and len(skills) == 13
    names = {s["name"] for s in skills}
    assert "build_house" in names and "stack_blocks" in names

    status, versions = request(port, "GET", "/api/skills/stack_blocks/versions")
    assert status == 200
    assert [v["version"] for v in versions] == [1]
    assert versions[0]["source"].startswith("skill stack_blocks(")

    status, examples = request(port, "GET", "/api/examples")
    assert status == 200 and len(examples) == 9

    status, body = request(port, "GET", "/api/skills/ghost/versions")
    assert status == 404


def test_two_concurrent_sessions_do_not_cross_contaminate(service) -> None:
    port, state = service
    body_a = house_session_body(seed=201)
    body_b = {
        "mode": "solve",
        "instruction": "stack all blocks into a tower",
        "seed": 202,
        "scene": {"name": "stack_blocks", "seed": 202},
        "agent_script": [
            {"expect_kind": "task_code", "response_text": plan_stack_blocks()},
        ],
    }
    _, ha = request(port, "POST", "/api/session", body_a)
    _, hb = request(port, "POST", "/api/session", body_b)
    sa, sb = ha["id"], hb["id"]

    drive_until(port, sa, 0, lambda p: p["status"] == "awaiting_feedback")
    drive_until(port, sb, 0, lambda p: p["status"] == "awaiting_feedback")

    # interleave: feedback to B first, then A; each session only sees its own
    request(port, "POST", f"/api/session/{sb}/feedback", {"kind": "accept"})
    drive_until(port, sb, 0, lambda p: p["status"] in ("done", "failed"))
    request(port, "POST", f"/api/session/{sa}/feedback", {"kind": "accept"})
    drive_until(port, sa, 0, lambda p: p["status"] in ("done", "failed"))

    world_a = json.loads(state.get(sa).world_snapshot)
    world_b = json.loads(state.get(sb).world_snapshot)
    assert len(world_a["objects"]) == 22
    assert len(world_b["objects"]) == 4

    _, page_a = request(port, "GET", f"/api/session/{sa}/events?since=0")
    instructions = {
        e["instruction"] for e in page_a["events"] if e["type"] == "task_start"
    }
    assert instructions == {"build a house"}


def test_long_poll_returns_empty_page_on_timeout(service) -> None:
    port, _ = service
    _, handle = request(port, "POST", "/api/session", house_session_body(seed=301))
    sid = handle["id"]
    cursor, _ = drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    # no new events while awaiting feedback: the poll times out with an empty page
    status, page = request(port, "GET", f"/api/session/{sid}/events?since={cursor}")
    assert status == 200
    assert page["events"] == []
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    drive_until(port, sid, cursor, lambda p: p["status"] in ("done", "failed"))


def test_summary_includes_success_report_for_evaluated_sessions(service) -> None:
    port, _ = service
    body = house_session_body(seed=401)
    body["evaluator"] = "house"
    _, handle = request(port, "POST", "/api/session", body)
    sid = handle["id"]
    cursor, _ = drive_until(port, sid, 0, lambda p: p["status"] == "awaiting_feedback")
    status, summary = request(port, "GET", f"/api/session/{sid}")
    assert status == 200
    report = summary["success_report"]
    assert report is not None
    assert report["success"] is True
    assert report["primitive_count"] >= 20
    names = {c["name"] for c in report["checks"]}
    assert "tiles_two_rows_of_three" in names
    request(port, "POST", f"/api/session/{sid}/feedback", {"kind": "accept"})
    drive_until(port, sid, cursor, lambda p: p["status"] in ("done", "failed"))
