"""Filesystem document store backing the service.

Skeletons, clips and controllers are content-addressed (id = first 16 hex
chars of the SHA-256 of their canonical bytes, so identical documents
dedupe); sessions get random URL-safe ids. Every write goes
temp-file-then-rename, so a crash mid-write never corrupts an existing
document and readers only ever see complete files.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import tempfile
import time
from pathlib import Path

from .errors import RigmotionError

SKELETONS = "skeletons"
CLIPS = "clips"
SESSIONS = "sessions"
CONTROLLERS = "controllers"

_KINDS = (SKELETONS, CLIPS, SESSIONS, CONTROLLERS)


class UnknownDocument(RigmotionError):
    def __init__(self, kind: str, doc_id: str):
        super().__init__(f"no {kind[:-1]} with id {doc_id!r}")
        self.kind = kind
        self.doc_id = doc_id


class DuplicateId(RigmotionError):
    def __init__(self, kind: str, doc_id: str):
        super().__init__(f"{kind[:-1]} id {doc_id!r} already exists with different content")
        self.kind = kind
        self.doc_id = doc_id


def content_id(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def new_session_id() -> str:
    return secrets.token_urlsafe(12)  # 16 URL-safe chars


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for kind in _KINDS:
            (self.root / kind).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, doc_id: str) -> Path:
        if kind not in _KINDS:
            raise ValueError(f"unknown document kind {kind!r}")
        safe = "".join(c for c in doc_id if c.isalnum() or c in "-_")
        if safe != doc_id or not doc_id:
            raise UnknownDocument(kind, doc_id)
        return self.root / kind / f"{doc_id}.json"

    def _write_atomic(self, path: Path, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def put_content(self, kind: str, data: bytes) -> str:
        """Store a content-addressed document; returns its id. Writing the
        same bytes twice is a no-op."""
        doc_id = content_id(data)
        path = self._path(kind, doc_id)
        if path.exists():
            if path.read_bytes() != data:
                raise DuplicateId(kind, doc_id)
            return doc_id
        self._write_atomic(path, data)
        return doc_id

    def put_named(self, kind: str, doc_id: str, data: bytes) -> str:
        """Store or overwrite a document under a fixed id (sessions)."""
        self._write_atomic(self._path(kind, doc_id), data)
        return doc_id

    def get(self, kind: str, doc_id: str) -> bytes:
        path = self._path(kind, doc_id)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise UnknownDocument(kind, doc_id) from None

    def exists(self, kind: str, doc_id: str) -> bool:
        try:
            return self._path(kind, doc_id).exists()
        except UnknownDocument:
            return False

    def list_ids(self, kind: str) -> list[str]:
        if kind not in _KINDS:
            raise ValueError(f"unknown document kind {kind!r}")
        return sorted(
            p.stem for p in (self.root / kind).glob("*.json") if not p.name.startswith(".tmp-")
        )


# --- session documents -------------------------------------------------------


def session_doc(skeleton_id: str) -> dict:
    return {
        "id": new_session_id(),
        "skeleton_id": skeleton_id,
        "history": [],
        "created_at": time.time(),
    }


def session_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def append_history(doc: dict, user_request: str, clip_id: str, attempts: int) -> dict:
    entry = {
        "user_request": user_request,
        "clip_id": clip_id,
        "attempts": attempts,
        "created_at": time.time(),
    }
    doc = dict(doc)
    doc["history"] = list(doc["history"]) + [entry]
    return doc
