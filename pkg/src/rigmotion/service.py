"""HTTP API for the prompt -> preview -> refine loop (see docs/http-api.md).

Stateless between requests apart from the document store; per-session
mutations are serialized with an in-process lock. Canonical documents
(skeletons, clips) are served byte-exactly as stored. Error bodies are
always {code, message, details}.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import control as ctrl
from .clip import clip_from_json, clip_to_json, validate_against
from .geometry import Vec3
from .kinematics import CLAMP, LOOP, JointPose, Pose, forward_kinematics, sample_series
from .llm_bridge import (
    GenerationResult,
    LlmConfig,
    NoValidAnimation,
    Transport,
    TransportError,
    generate_animation,
)
from .promptkit import (
    FEW_SHOT,
    ZERO_SHOT,
    Demonstration,
    MetapromptSpec,
    PromptError,
)
from .skeleton import (
    DegenerateRotation,
    DuplicateJointName,
    MalformedJson,
    NotATree,
    Skeleton,
    joint_names,
    parent_map,
    parse_object_json,
    serialize_object_json,
)
from .store import (
    CLIPS,
    CONTROLLERS,
    SESSIONS,
    SKELETONS,
    DuplicateId,
    Store,
    UnknownDocument,
    append_history,
    session_bytes,
    session_doc,
)

DEFAULT_PORT = 7878


@dataclass
class ServiceConfig:
    store_dir: str
    llm: LlmConfig = field(default_factory=LlmConfig)
    template_dir: str | None = None
    cors_origins: tuple[str, ...] = ("*",)
    # Used for zero-shot requests that carry no demonstration; the paper's
    # pipeline reuses one well-known animation for format guidance.
    default_demonstration: Demonstration | None = None


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or {}},
    )


def _world_pose_payload(world) -> dict:
    return {
        name: {
            "p": [wj.position.x, wj.position.y, wj.position.z],
            "r": [wj.rotation.x, wj.rotation.y, wj.rotation.z, wj.rotation.w],
        }
        for name, wj in world.items()
    }


def build_app(config: ServiceConfig, transport: Transport | None = None) -> FastAPI:
    """Assemble the API around a store directory and an injected transport
    (None leaves generation endpoints returning 502 with a clear code)."""
    app = FastAPI(title="rigmotion service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = Store(config.store_dir)
    session_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            if session_id not in session_locks:
                session_locks[session_id] = threading.Lock()
            return session_locks[session_id]

    def load_skeleton(skeleton_id: str) -> Skeleton:
        return parse_object_json(store.get(SKELETONS, skeleton_id).decode("utf-8"))

    @app.exception_handler(UnknownDocument)
    async def unknown_doc(request: Request, exc: UnknownDocument):
        return _error(404, "UnknownDocument", str(exc))

    @app.exception_handler(DuplicateId)
    async def duplicate_id(request: Request, exc: DuplicateId):
        return _error(409, "DuplicateId", str(exc))

    @app.post("/skeletons")
    async def post_skeleton(request: Request):
        body = (await request.body()).decode("utf-8", errors="replace")
        try:
            skeleton = parse_object_json(body)
        except (MalformedJson, DuplicateJointName, NotATree, DegenerateRotation) as e:
            return _error(400, type(e).__name__, str(e))
        canonical = serialize_object_json(skeleton).encode("utf-8")
        skeleton_id = store.put_content(SKELETONS, canonical)
        return {"skeleton_id": skeleton_id}

    @app.get("/skeletons/{skeleton_id}")
    def get_skeleton(skeleton_id: str):
        return Response(content=store.get(SKELETONS, skeleton_id), media_type="application/json")

    @app.get("/skeletons/{skeleton_id}/topology")
    def get_topology(skeleton_id: str):
        skeleton = load_skeleton(skeleton_id)
        parents = parent_map(skeleton)
        names = joint_names(skeleton)
        bones = [[parents[n], n] for n in names if parents[n] is not None]
        return {"object_name": skeleton.object_name, "joints": names, "bones": bones}

    @app.get("/skeletons/{skeleton_id}/rest_pose")
    def get_rest_pose(skeleton_id: str):
        skeleton = load_skeleton(skeleton_id)
        pose: Pose = {}
        stack = [skeleton.root]
        while stack:
            joint = stack.pop()
            pose[joint.name] = JointPose(joint.rest_rotation, Vec3())
            stack.extend(joint.children)
        world = forward_kinematics(skeleton, pose)
        return {"joints": _world_pose_payload(world)}

    @app.post("/sessions")
    async def post_session(request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "MalformedJson", "body must be JSON")
        skeleton_id = payload.get("skeleton_id") if isinstance(payload, dict) else None
        if not skeleton_id:
            return _error(400, "MissingField", "body needs skeleton_id")
        if not store.exists(SKELETONS, skeleton_id):
            return _error(404, "UnknownDocument", f"no skeleton with id {skeleton_id!r}")
        doc = session_doc(skeleton_id)
        store.put_named(SESSIONS, doc["id"], session_bytes(doc))
        return {"session_id": doc["id"]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return Response(content=store.get(SESSIONS, session_id), media_type="application/json")

    @app.post("/sessions/{session_id}/generate")
    async def post_generate(session_id: str, request: Request):
        if transport is None:
            return _error(502, "NoTransport", "service started without an LLM transport")
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "MalformedJson", "body must be JSON")
        if not isinstance(payload, dict) or not payload.get("request"):
            return _error(400, "MissingField", "body needs a request string")
        mode = payload.get("mode", FEW_SHOT)
        if mode not in (FEW_SHOT, ZERO_SHOT):
            return _error(400, "BadMode", f"mode must be {FEW_SHOT} or {ZERO_SHOT}")
        demos = [
            Demonstration(d.get("name", ""), d.get("animation_string", ""))
            for d in payload.get("demonstrations", [])
            if isinstance(d, dict)
        ]
        if not demos and mode == ZERO_SHOT and config.default_demonstration is not None:
            demos = [config.default_demonstration]

        lock = session_lock(session_id)
        with lock:
            session = json.loads(store.get(SESSIONS, session_id).decode("utf-8"))
            skeleton = load_skeleton(session["skeleton_id"])
            spec = MetapromptSpec(
                template_id=mode,
                object_name=skeleton.object_name,
                object_json=store.get(SKELETONS, session["skeleton_id"]).decode("utf-8"),
                demonstrations=tuple(demos),
                user_request=payload["request"],
            )
            try:
                result: GenerationResult = generate_animation(
                    spec, skeleton, config.llm, transport, config.template_dir
                )
            except PromptError as e:
                return _error(400, type(e).__name__, str(e))
            except NoValidAnimation as e:
                return _error(
                    502,
                    "NoValidAnimation",
                    str(e),
                    {
                        "attempts": e.attempts,
                        "last_errors": e.last_errors,
                        "repair_notes": e.repair_notes,
                    },
                )
            except TransportError as e:
                return _error(502, type(e).__name__, str(e))
            clip_id = store.put_content(CLIPS, clip_to_json(result.clip).encode("utf-8"))
            updated = append_history(session, payload["request"], clip_id, result.attempts)
            store.put_named(SESSIONS, session_id, session_bytes(updated))
        return {
            "clip_id": clip_id,
            "attempts": result.attempts,
            "repair_notes": result.repair_notes,
        }

    @app.get("/clips/{clip_id}")
    def get_clip(clip_id: str):
        return Response(content=store.get(CLIPS, clip_id), media_type="application/json")

    @app.get("/clips/{clip_id}/frames")
    def get_frames(clip_id: str, skeleton: str, fps: float = 30.0, edge: str = CLAMP):
        if edge not in (CLAMP, LOOP):
            return _error(400, "BadEdge", "edge must be clamp or loop")
        if not 0 < fps <= 240:
            return _error(400, "BadFps", "fps must be in (0, 240]")
        clip = clip_from_json(store.get(CLIPS, clip_id).decode("utf-8"))
        target = load_skeleton(skeleton)
        report = validate_against(clip, target)
        if not report.is_valid:
            return _error(
                400, "InvalidClip", "clip does not fit this skeleton",
                {"errors": report.error_messages()},
            )
        series = sample_series(clip, target, fps, edge)
        return [{"t": t, "joints": _world_pose_payload(world)} for t, world in series]

    @app.post("/controllers")
    async def post_controller(request: Request):
        body = (await request.body()).decode("utf-8", errors="replace")
        try:
            ctrl.parse_controller(body)
        except ctrl.ControllerError as e:
            return _error(400, type(e).__name__, str(e))
        controller_id = store.put_content(
            CONTROLLERS, _controller_bytes(body)
        )
        return {"controller_id": controller_id}

    @app.post("/controllers/generate")
    async def post_controller_generate(request: Request):
        if transport is None:
            return _error(502, "NoTransport", "service started without an LLM transport")
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "MalformedJson", "body must be JSON")
        if not isinstance(payload, dict) or not payload.get("request"):
            return _error(400, "MissingField", "body needs a request string")
        clips = payload.get("available_clips") or []
        if not clips:
            return _error(400, "MissingField", "body needs available_clips")
        try:
            program = ctrl.generate_controller(
                payload["request"], clips, config.llm, transport, config.template_dir
            )
        except ctrl.NoValidController as e:
            return _error(
                502, "NoValidController", str(e),
                {"attempts": e.attempts, "last_errors": e.last_errors},
            )
        except TransportError as e:
            return _error(502, type(e).__name__, str(e))
        text = ctrl.serialize_controller(program)
        controller_id = store.put_content(CONTROLLERS, _controller_bytes(text))
        return {"controller_id": controller_id, "program": text}

    @app.post("/controllers/{controller_id}/simulate")
    async def post_simulate(controller_id: str, request: Request):
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "MalformedJson", "body must be JSON")
        doc = json.loads(store.get(CONTROLLERS, controller_id).decode("utf-8"))
        program = ctrl.parse_controller(doc["text"])
        inputs = [(float(t), str(k)) for t, k in payload.get("inputs", [])]
        horizon = float(payload.get("horizon", 10.0))
        seed = int(payload.get("seed", 0))
        try:
            trace = ctrl.simulate(program, inputs, horizon, seed)
        except ValueError as e:
            return _error(400, "BadSimulation", str(e))
        return Response(content=ctrl.trace_to_json(trace), media_type="application/json")

    return app


def _controller_bytes(text: str) -> bytes:
    return (json.dumps({"text": text}, indent=2, sort_keys=True) + "\n").encode("utf-8")


def run_server(
    config: ServiceConfig,
    transport: Transport | None = None,
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
) -> None:
    import uvicorn

    uvicorn.run(build_app(config, transport), host=host, port=port)
