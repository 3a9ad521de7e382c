import json

import pytest

from rigmotion.store import (
    CLIPS,
    SESSIONS,
    SKELETONS,
    DuplicateId,
    Store,
    UnknownDocument,
    append_history,
    content_id,
    new_session_id,
    session_bytes,
    session_doc,
)


def test_content_round_trip_byte_exact(tmp_path):
    store = Store(tmp_path)
    data = b'{"name": "ball",\n  "children": []}\n'
    doc_id = store.put_content(SKELETONS, data)
    assert store.get(SKELETONS, doc_id) == data


def test_content_addressing_dedupes(tmp_path):
    store = Store(tmp_path)
    data = b'{"a": 1}'
    assert store.put_content(CLIPS, data) == store.put_content(CLIPS, data)
    assert len(store.list_ids(CLIPS)) == 1


def test_content_id_is_stable_prefix():
    assert content_id(b"hello") == content_id(b"hello")
    assert len(content_id(b"hello")) == 16


def test_unknown_document(tmp_path):
    store = Store(tmp_path)
    with pytest.raises(UnknownDocument):
        store.get(SKELETONS, "deadbeefdeadbeef")


def test_path_traversal_rejected(tmp_path):
    store = Store(tmp_path)
    with pytest.raises(UnknownDocument):
        store.get(SKELETONS, "../../etc/passwd")


def test_named_put_overwrites(tmp_path):
    store = Store(tmp_path)
    store.put_named(SESSIONS, "abc123", b"one")
    store.put_named(SESSIONS, "abc123", b"two")
    assert store.get(SESSIONS, "abc123") == b"two"


def test_collision_with_different_content_is_conflict(tmp_path, monkeypatch):
    store = Store(tmp_path)
    monkeypatch.setattr("rigmotion.store.content_id", lambda data: "fixed")
    store.put_content(CLIPS, b"one")
    with pytest.raises(DuplicateId):
        store.put_content(CLIPS, b"two")


def test_stray_temp_file_is_invisible(tmp_path):
    store = Store(tmp_path)
    doc_id = store.put_content(CLIPS, b"{}")
    # simulate a crash between temp-write and rename
    (tmp_path / CLIPS / ".tmp-leftover").write_bytes(b"partial garbage")
    assert store.list_ids(CLIPS) == [doc_id]
    assert store.get(CLIPS, doc_id) == b"{}"


def test_reopened_store_reads_identical_bytes(tmp_path):
    data = b'{"duration": 2}\n'
    doc_id = Store(tmp_path).put_content(CLIPS, data)
    assert Store(tmp_path).get(CLIPS, doc_id) == data


def test_session_ids_are_long_and_unique():
    ids = {new_session_id() for _ in range(200)}
    assert len(ids) == 200
    assert all(len(i) >= 16 for i in ids)


def test_session_doc_history_appends():
    doc = session_doc("skel1")
    doc2 = append_history(doc, "flap tail", "clip9", 2)
    assert doc["history"] == []
    assert [h["clip_id"] for h in doc2["history"]] == ["clip9"]
    assert doc2["history"][0]["attempts"] == 2
    parsed = json.loads(session_bytes(doc2))
    assert parsed["skeleton_id"] == "skel1"
