"""HTTP reward service: parity with the library, error codes, health, logging."""

from __future__ import annotations

import json
import logging
import os

import pytest
from fastapi.testclient import TestClient

from groundscore.config import ServiceConfig
from groundscore.geometry import BoxSet
from groundscore.judge import JudgeClient
from groundscore.parsing import parse_response
from groundscore.rewards import (
    GroundTruth,
    group_advantages,
    reward_spec_hash,
    score_batch,
    total_reward,
)
from groundscore.service import create_app
from groundscore.version import __version__

from conftest import chat_transport, failing_transport


def _client(config: ServiceConfig | None = None, judge_client=None) -> TestClient:
    return TestClient(create_app(config=config, judge_client=judge_client))


def _item(response_text: str, answer: str = "B", boxes=((0, 0, 2, 2),)) -> dict:
    return {
        "response_text": response_text,
        "ground_truth": {
            "answer_kind": "mcq",
            "answer": answer,
            "boxes": [list(b) for b in boxes],
        },
    }


MIXED_ITEMS = [
    _item("<think>at [0, 0, 2, 2]</think><answer>B</answer>"),
    _item("<think>[1, 1, 3, 3] then [9, 9, 11, 11]</think><answer>C</answer>"),
    _item("no tags, box [0, 0, 2, 2] and broken [5, 5, 1, 1], answer B"),
    _item("<think>empty handed</think><answer>B</answer>"),
]


def test_rewards_parity_with_library():
    client = _client()
    response = client.post("/v1/rewards", json={"items": MIXED_ITEMS})
    assert response.status_code == 200
    payload = response.json()
    assert len(payload["items"]) == len(MIXED_ITEMS)

    gt = GroundTruth(
        answer_kind="mcq",
        answer="B",
        target_boxes=BoxSet.from_xyxy([[0, 0, 2, 2]], role="ground_truth"),
    )
    for item, scored in zip(MIXED_ITEMS, payload["items"]):
        local = total_reward(parse_response(item["response_text"]), gt)
        assert scored["breakdown"]["acc"] == local.acc
        assert scored["breakdown"]["format"] == local.format
        assert scored["breakdown"]["iou_recall"] == local.iou_recall
        assert scored["breakdown"]["iou_precision"] == local.iou_precision
        assert scored["breakdown"]["iou"] == local.iou
        assert scored["breakdown"]["total"] == local.total
        assert scored["advantage"] is None

    # diagnostics reflect the parser, including the skipped-box tally
    diag = payload["items"][2]["diagnostics"]
    assert diag["format_ok"] is False
    assert diag["choice"] == "B"
    assert diag["boxes_extracted"] == 1
    assert diag["skipped_boxes"] == 1

    meta = payload["metadata"]
    assert meta["engine_version"] == __version__
    assert meta["reward_spec_hash"] == reward_spec_hash()
    assert meta["judge_model"] is None


def test_rewards_group_advantages():
    raws = [
        "<think>at [0, 0, 2, 2]</think><answer>B</answer>",
        "<think>way off [100, 100, 102, 102]</think><answer>A</answer>",
        "<think>at [0, 0, 2, 2]</think><answer>B</answer>",
        "<think>at [0, 0, 2, 2]</think><answer>B</answer>",
    ]
    client = _client()
    response = client.post(
        "/v1/rewards",
        json={"items": [_item(raw) for raw in raws], "options": {"group_size": 2}},
    )
    assert response.status_code == 200
    got = [item["advantage"] for item in response.json()["items"]]
    totals = [item["breakdown"]["total"] for item in response.json()["items"]]
    assert got[:2] == pytest.approx(group_advantages(totals[:2]))
    assert got[2:] == [0.0, 0.0]  # constant group is exactly zero
    assert got[0] > 0 > got[1]


def test_rewards_group_size_must_divide():
    client = _client()
    response = client.post(
        "/v1/rewards",
        json={"items": MIXED_ITEMS[:3], "options": {"group_size": 2}},
    )
    assert response.status_code == 400
    assert "divisible" in response.json()["detail"]["message"]


def test_schema_violations_are_400_with_item_index():
    client = _client()

    # malformed body shape
    response = client.post("/v1/rewards", json={"items": []})
    assert response.status_code == 400

    # second item is missing its ground truth
    bad = [MIXED_ITEMS[0], {"response_text": "hi"}]
    response = client.post("/v1/rewards", json={"items": bad})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["item_index"] == 1
    assert "ground_truth" in detail["message"]

    # semantic violation caught at domain conversion: degenerate box
    bad = [MIXED_ITEMS[0], MIXED_ITEMS[1], _item("x", boxes=((5, 5, 5, 9),))]
    response = client.post("/v1/rewards", json={"items": bad})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["item_index"] == 2
    assert "invalid ground truth" in detail["message"]

    # semantic violation: mcq answer outside the letter alphabet
    response = client.post("/v1/rewards", json={"items": [_item("x", answer="Q")]})
    assert response.status_code == 400
    assert response.json()["detail"]["item_index"] == 0


def test_oversized_batch_is_413():
    config = ServiceConfig(max_batch=8)
    client = _client(config)
    items = [MIXED_ITEMS[0]] * 9
    response = client.post("/v1/rewards", json={"items": items})
    assert response.status_code == 413
    assert "cap of 8" in response.json()["detail"]["message"]
    # at the cap is fine
    response = client.post("/v1/rewards", json={"items": items[:8]})
    assert response.status_code == 200


def test_auth_token(monkeypatch):
    monkeypatch.setenv("GROUNDSCORE_AUTH_TOKEN", "sesame")
    client = _client()
    body = {"items": [MIXED_ITEMS[0]]}
    assert client.post("/v1/rewards", json=body).status_code == 401
    wrong = client.post(
        "/v1/rewards", json=body, headers={"Authorization": "Bearer wrong"}
    )
    assert wrong.status_code == 401
    assert wrong.json()["detail"]["message"] == "missing or invalid bearer token"
    ok = client.post(
        "/v1/rewards", json=body, headers={"Authorization": "Bearer sesame"}
    )
    assert ok.status_code == 200


OPEN_ENDED_ITEM = {
    "response_text": "<think>looks like a kite</think><answer>a red kite</answer>",
    "ground_truth": {
        "answer_kind": "open_ended",
        "answer": "a red kite",
        "question": "What is in the sky?",
    },
}


def _scripted_judge(reply) -> JudgeClient:
    return JudgeClient(
        base_url="http://judge.test/v1",
        model="judge-model",
        transport=chat_transport(reply),
        max_retries=0,
    )


def test_open_ended_without_judge_is_422():
    # no judge configured at all
    response = _client().post(
        "/v1/rewards", json={"items": [OPEN_ENDED_ITEM], "options": {"judge": True}}
    )
    assert response.status_code == 422
    assert "not configured" in response.json()["detail"]["message"]

    # judge exists but the request did not opt in
    judged = _client(judge_client=_scripted_judge(lambda body: "correct"))
    response = judged.post("/v1/rewards", json={"items": [OPEN_ENDED_ITEM]})
    assert response.status_code == 422
    assert "not enabled in options" in response.json()["detail"]["message"]


def test_open_ended_with_judge_scores_accuracy():
    def reply(body):
        prompt = body["messages"][0]["content"]
        candidate = prompt.split("Candidate answer: ")[1].splitlines()[0]
        return "correct" if "kite" in candidate else "incorrect"

    client = _client(judge_client=_scripted_judge(reply))
    wrong = dict(OPEN_ENDED_ITEM, response_text="<think>hm</think><answer>a balloon</answer>")
    response = client.post(
        "/v1/rewards",
        json={"items": [OPEN_ENDED_ITEM, wrong, MIXED_ITEMS[0]], "options": {"judge": True}},
    )
    assert response.status_code == 200
    payload = response.json()
    assert [item["breakdown"]["acc"] for item in payload["items"]] == [1, 0, 1]
    assert payload["metadata"]["judge_model"] == "judge-model"
    # spec hash covers the judge prompt, same template as the default
    assert payload["metadata"]["reward_spec_hash"] == reward_spec_hash()


def test_judge_upstream_failure_is_502_with_retry_after():
    judge = JudgeClient(
        base_url="http://judge.test/v1",
        model="judge-model",
        transport=failing_transport(503),
        max_retries=0,
    )
    client = _client(judge_client=judge)
    response = client.post(
        "/v1/rewards", json={"items": [OPEN_ENDED_ITEM], "options": {"judge": True}}
    )
    assert response.status_code == 502
    assert response.headers["Retry-After"] == "1"
    assert "judge upstream failure" in response.json()["detail"]["message"]


def test_service_matches_score_batch_bit_for_bit():
    raws = [item["response_text"] for item in MIXED_ITEMS]
    gt = GroundTruth(
        answer_kind="mcq",
        answer="B",
        target_boxes=BoxSet.from_xyxy([[0, 0, 2, 2]], role="ground_truth"),
    )
    local = score_batch([(raw, gt) for raw in raws])
    response = _client().post("/v1/rewards", json={"items": MIXED_ITEMS})
    served = response.json()["items"]
    assert [s["breakdown"]["total"] for s in served] == [b.total for b in local]
    assert [s["breakdown"]["iou"] for s in served] == [b.iou for b in local]


def test_health_without_judge():
    response = _client().get("/v1/health")
    assert response.status_code == 200
    payload = response.json()
    assert payload["status"] == "ok"
    assert payload["version"] == __version__
    assert payload["uptime_seconds"] >= 0.0
    assert payload["judge"] == {"configured": False, "reachable": None}


def test_health_with_judge_states():
    healthy = _client(judge_client=_scripted_judge(lambda body: "correct"))
    payload = healthy.get("/v1/health").json()
    assert payload["status"] == "ok"
    assert payload["judge"] == {"configured": True, "reachable": True}

    judge = JudgeClient(
        base_url="http://judge.test/v1", model="judge-model", transport=failing_transport(503)
    )
    degraded = _client(judge_client=judge)
    payload = degraded.get("/v1/health").json()
    assert payload["status"] == "degraded"
    assert payload["judge"] == {"configured": True, "reachable": False}


def test_access_log_line(caplog):
    client = _client()
    with caplog.at_level(logging.INFO, logger="groundscore.service.access"):
        client.post("/v1/rewards", json={"items": MIXED_ITEMS})
    lines = [json.loads(r.message) for r in caplog.records if r.name == "groundscore.service.access"]
    assert len(lines) == 1
    line = lines[0]
    assert line["method"] == "POST"
    assert line["path"] == "/v1/rewards"
    assert line["status"] == 200
    assert line["batch_size"] == len(MIXED_ITEMS)
    assert line["latency_ms"] >= 0.0
    assert 0.0 <= line["reward_mean"] <= 3.0


def test_unknown_fields_are_ignored():
    # lenient on extras so client libraries can evolve first
    item = dict(MIXED_ITEMS[0], rollout_id="r-17")
    response = _client().post("/v1/rewards", json={"items": [item]})
    assert response.status_code == 200
