import json

import pytest
from fastapi.testclient import TestClient

from rigmotion import fixtures
from rigmotion.llm_bridge import ReplayTransport
from rigmotion.promptkit import Demonstration
from rigmotion.service import ServiceConfig, build_app

FLAP_RESPONSE = """ANIMATION Flap
DURATION 2
JOINT TailBase
(0, 0, 0.3, 0.95, 0)
(0, 0, -0.3, 0.95, 1)
(0, 0, 0.3, 0.95, 2)
END
"""

LAMP_NOD_RESPONSE = """ANIMATION Nod
DURATION 1
JOINT Head
(0, 0, 0, 1, 0)
(0.2, 0, 0, 0.98, 0.5)
(0, 0, 0, 1, 1)
END
"""


def make_client(tmp_path, responses=None) -> TestClient:
    config = ServiceConfig(
        store_dir=str(tmp_path / "store"),
        default_demonstration=Demonstration(
            fixtures.WHALE_SWIM_DESCRIPTION, fixtures.whale_swim_animstring()
        ),
    )
    transport = ReplayTransport(responses) if responses is not None else None
    return TestClient(build_app(config, transport))


def post_whale(client) -> str:
    r = client.post("/skeletons", content=fixtures.whale_object_json())
    assert r.status_code == 200
    return r.json()["skeleton_id"]


def open_session(client, skeleton_id) -> str:
    r = client.post("/sessions", json={"skeleton_id": skeleton_id})
    assert r.status_code == 200
    return r.json()["session_id"]


def test_skeleton_round_trip(tmp_path):
    client = make_client(tmp_path)
    sid = post_whale(client)
    r = client.get(f"/skeletons/{sid}")
    assert r.status_code == 200
    assert json.loads(r.text)["name"] == "Armature"
    # stored canonical form is a parse -> serialize fixed point
    r2 = client.post("/skeletons", content=r.text)
    assert r2.json()["skeleton_id"] == sid


def test_malformed_skeleton_is_400_with_typed_code(tmp_path):
    client = make_client(tmp_path)
    head = {"name": "Head", "children": []}
    doc = {"name": "r", "children": [{"name": "a", "children": [head]},
                                     {"name": "b", "children": [head]}]}
    r = client.post("/skeletons", content=json.dumps(doc))
    assert r.status_code == 400
    body = r.json()
    assert body["code"] == "NotATree"
    assert "message" in body and "details" in body


def test_missing_skeleton_404(tmp_path):
    client = make_client(tmp_path)
    r = client.get("/skeletons/0000000000000000")
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownDocument"


def test_topology_and_rest_pose(tmp_path):
    client = make_client(tmp_path)
    sid = post_whale(client)
    topo = client.get(f"/skeletons/{sid}/topology").json()
    assert topo["joints"] == ["Armature", "Spine", "Head", "TailBase", "TailTip"]
    assert len(topo["bones"]) == 4
    rest = client.get(f"/skeletons/{sid}/rest_pose").json()
    assert abs(rest["joints"]["Head"]["p"][0] - 1.3) < 1e-6


def test_session_requires_existing_skeleton(tmp_path):
    client = make_client(tmp_path)
    r = client.post("/sessions", json={"skeleton_id": "nope"})
    assert r.status_code == 404


def test_generate_and_fetch_clip(tmp_path):
    client = make_client(tmp_path, [FLAP_RESPONSE])
    sid = post_whale(client)
    session = open_session(client, sid)
    r = client.post(
        f"/sessions/{session}/generate",
        json={
            "request": "flap the tail",
            "mode": "few_shot",
            "demonstrations": [
                {"name": fixtures.WHALE_SWIM_DESCRIPTION,
                 "animation_string": fixtures.whale_swim_animstring()}
            ],
        },
    )
    assert r.status_code == 200
    body = r.json()
    assert body["attempts"] == 1
    clip = client.get(f"/clips/{body['clip_id']}")
    assert clip.status_code == 200
    assert json.loads(clip.text)["name"] == "Flap"
    # session history recorded the generation
    history = json.loads(client.get(f"/sessions/{session}").text)["history"]
    assert [h["clip_id"] for h in history] == [body["clip_id"]]


def test_zero_shot_uses_default_demo(tmp_path):
    client = make_client(tmp_path, [LAMP_NOD_RESPONSE])
    r = client.post("/skeletons", content=fixtures.lamp_object_json())
    session = open_session(client, r.json()["skeleton_id"])
    r = client.post(
        f"/sessions/{session}/generate",
        json={"request": "nod the head", "mode": "zero_shot"},
    )
    assert r.status_code == 200


def test_generate_failure_is_502_with_last_errors(tmp_path):
    client = make_client(tmp_path, ["garbage", "more garbage", "still bad"])
    sid = post_whale(client)
    session = open_session(client, sid)
    r = client.post(
        f"/sessions/{session}/generate",
        json={"request": "flap", "mode": "zero_shot"},
    )
    assert r.status_code == 502
    body = r.json()
    assert body["code"] == "NoValidAnimation"
    assert body["details"]["attempts"] == 3
    assert body["details"]["last_errors"]
    assert len(body["details"]["repair_notes"]) == 3  # one per failed attempt


def test_frames_obey_fps_grid(tmp_path):
    client = make_client(tmp_path, [FLAP_RESPONSE])
    sid = post_whale(client)
    session = open_session(client, sid)
    clip_id = client.post(
        f"/sessions/{session}/generate",
        json={"request": "flap", "mode": "zero_shot"},
    ).json()["clip_id"]
    frames = client.get(f"/clips/{clip_id}/frames?skeleton={sid}&fps=4&edge=clamp").json()
    assert len(frames) == 9  # duration 2 at 4 fps
    assert set(frames[0]["joints"].keys()) == {"Armature", "Spine", "Head", "TailBase", "TailTip"}
    assert frames[0]["t"] == 0
    assert frames[-1]["t"] == 2


def test_frames_reject_wrong_skeleton(tmp_path):
    client = make_client(tmp_path, [FLAP_RESPONSE])
    whale_id = post_whale(client)
    lamp_id = client.post("/skeletons", content=fixtures.lamp_object_json()).json()["skeleton_id"]
    session = open_session(client, whale_id)
    clip_id = client.post(
        f"/sessions/{session}/generate", json={"request": "flap", "mode": "zero_shot"}
    ).json()["clip_id"]
    r = client.get(f"/clips/{clip_id}/frames?skeleton={lamp_id}&fps=4")
    assert r.status_code == 400
    assert r.json()["code"] == "InvalidClip"


def test_frames_validation_flags(tmp_path):
    client = make_client(tmp_path, [FLAP_RESPONSE])
    sid = post_whale(client)
    session = open_session(client, sid)
    clip_id = client.post(
        f"/sessions/{session}/generate", json={"request": "flap", "mode": "zero_shot"}
    ).json()["clip_id"]
    assert client.get(f"/clips/{clip_id}/frames?skeleton={sid}&fps=0").status_code == 400
    assert client.get(f"/clips/{clip_id}/frames?skeleton={sid}&fps=4&edge=warp").status_code == 400


def test_controller_upload_and_simulate(tmp_path):
    client = make_client(tmp_path)
    r = client.post("/controllers", content=fixtures.idle_walk_controller())
    assert r.status_code == 200
    cid = r.json()["controller_id"]
    r = client.post(
        f"/controllers/{cid}/simulate",
        json={"inputs": [[1.0, "space"]], "horizon": 10.0, "seed": 0},
    )
    assert r.status_code == 200
    trace = r.json()
    assert trace["events"][0] == {"t": 0, "event": "entered", "state": "idle"}
    assert trace["events"][-1] == {"t": 1, "event": "entered", "state": "walk"}


def test_controller_generate_endpoint(tmp_path):
    idle_walk = fixtures.idle_walk_controller()
    client = make_client(tmp_path, [idle_walk])
    r = client.post(
        "/controllers/generate",
        json={"request": "walk on space", "available_clips": ["Idle", "Walking"]},
    )
    assert r.status_code == 200
    assert "controller_id" in r.json()


def test_bad_controller_is_400(tmp_path):
    client = make_client(tmp_path)
    r = client.post("/controllers", content="state broken")
    assert r.status_code == 400


def test_generate_without_transport_is_502(tmp_path):
    client = make_client(tmp_path)
    sid = post_whale(client)
    session = open_session(client, sid)
    r = client.post(f"/sessions/{session}/generate", json={"request": "x"})
    assert r.status_code == 502
    assert r.json()["code"] == "NoTransport"


def test_store_survives_restart(tmp_path):
    client = make_client(tmp_path, [FLAP_RESPONSE])
    sid = post_whale(client)
    session = open_session(client, sid)
    clip_id = client.post(
        f"/sessions/{session}/generate", json={"request": "flap", "mode": "zero_shot"}
    ).json()["clip_id"]
    before_skel = client.get(f"/skeletons/{sid}").text
    before_clip = client.get(f"/clips/{clip_id}").text
    # a brand-new app over the same directory reads identical bytes
    client2 = make_client(tmp_path)
    assert client2.get(f"/skeletons/{sid}").text == before_skel
    assert client2.get(f"/clips/{clip_id}").text == before_clip


def test_cors_headers_present(tmp_path):
    client = make_client(tmp_path)
    r = client.get("/skeletons/0000000000000000", headers={"Origin": "http://localhost:5173"})
    assert r.headers.get("access-control-allow-origin") == "*"
