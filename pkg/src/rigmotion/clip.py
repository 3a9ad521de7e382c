"""In-memory animation clips and their validation against a skeleton.

A clip stores absolute local rotations per joint (they replace the rest
rotation when sampled, matching engine curve semantics) plus an optional
root translation track that is added on top of the root's rest
translation. Per-joint translation tracks exist as an optional extension
for non-rigid objects and are off by default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .errors import RigmotionError
from .geometry import Quaternion, Vec3, geodesic_angle
from .numfmt import canonical_number
from .skeleton import DegenerateRotation, Skeleton, joint_names

# Below this norm a rotation carries no usable direction information.
_MIN_NORM = 0.1
# Tracks whose keys all agree within this angle are considered static
# (kept above acos rounding noise near dot = 1).
_MOTION_EPS = 1e-6


@dataclass(frozen=True)
class RotationKey:
    time: float
    rotation: Quaternion


@dataclass(frozen=True)
class TranslationKey:
    time: float
    translation: Vec3


@dataclass(frozen=True)
class RotationTrack:
    joint_name: str
    keys: tuple[RotationKey, ...]


@dataclass(frozen=True)
class TranslationTrack:
    joint_name: str
    keys: tuple[TranslationKey, ...]


@dataclass(frozen=True)
class Clip:
    name: str
    duration: float
    rotation_tracks: tuple[RotationTrack, ...] = ()
    root_motion: tuple[TranslationKey, ...] = ()
    extra_translation_tracks: tuple[TranslationTrack, ...] = ()

    def track_for(self, joint: str) -> RotationTrack | None:
        for t in self.rotation_tracks:
            if t.joint_name == joint:
                return t
        return None

    def key_count(self) -> int:
        n = sum(len(t.keys) for t in self.rotation_tracks)
        n += len(self.root_motion)
        n += sum(len(t.keys) for t in self.extra_translation_tracks)
        return n


ERROR = "error"
INFO = "info"


@dataclass(frozen=True)
class ValidationIssue:
    severity: str
    code: str
    message: str
    joint: str | None = None
    time: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]
    tracked_joints: tuple[str, ...]
    motion_joints: tuple[str, ...]
    untracked_joints: tuple[str, ...]

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == ERROR)

    @property
    def is_valid(self) -> bool:
        return not self.errors

    def error_messages(self) -> list[str]:
        return [f"{i.code}: {i.message}" for i in self.errors]

    def summary(self) -> str:
        lines = [
            f"{i.severity.upper()} {i.code}: {i.message}" for i in self.issues
        ]
        verdict = "valid" if self.is_valid else "invalid"
        lines.append(
            f"{verdict}: {len(self.errors)} error(s), "
            f"{len(self.issues) - len(self.errors)} other issue(s)"
        )
        return "\n".join(lines)


def _track_has_motion(track: RotationTrack) -> bool:
    first = track.keys[0].rotation
    for k in track.keys[1:]:
        if geodesic_angle(first, k.rotation) > _MOTION_EPS:
            return True
    return False


def validate_against(c: Clip, s: Skeleton) -> ValidationReport:
    """Check a clip against a skeleton; problems become report entries,
    never exceptions. The clip is usable iff the report has no errors."""
    issues: list[ValidationIssue] = []
    known = joint_names(s)
    known_set = set(known)

    if not (math.isfinite(c.duration) and c.duration > 0):
        issues.append(
            ValidationIssue(ERROR, "NonPositiveDuration", f"duration {c.duration} must be > 0")
        )

    def check_times(joint: str | None, times: list[float], label: str) -> None:
        prev = None
        for t in times:
            if not math.isfinite(t):
                issues.append(
                    ValidationIssue(ERROR, "NonFiniteTime", f"{label}: non-finite key time", joint, t)
                )
                continue
            if t < 0 or (math.isfinite(c.duration) and t > c.duration):
                issues.append(
                    ValidationIssue(
                        ERROR,
                        "OutOfRangeTime",
                        f"{label}: key at t={t:g} outside [0, {c.duration:g}]",
                        joint,
                        t,
                    )
                )
            if prev is not None and t <= prev:
                issues.append(
                    ValidationIssue(
                        ERROR,
                        "NonMonotoneTime",
                        f"{label}: key times not strictly increasing at t={t:g}",
                        joint,
                        t,
                    )
                )
            prev = t

    seen_tracks: set[str] = set()
    tracked: list[str] = []
    motion: list[str] = []
    for track in c.rotation_tracks:
        name = track.joint_name
        if name in seen_tracks:
            issues.append(
                ValidationIssue(ERROR, "DuplicateTrack", f"two rotation tracks for joint {name!r}", name)
            )
            continue
        seen_tracks.add(name)
        if name not in known_set:
            issues.append(
                ValidationIssue(ERROR, "UnknownJoint", f"no joint named {name!r} in skeleton", name)
            )
            continue
        tracked.append(name)
        if not track.keys:
            issues.append(
                ValidationIssue(ERROR, "EmptyTrack", f"track for {name!r} has no keys", name)
            )
            continue
        check_times(name, [k.time for k in track.keys], f"joint {name!r}")
        for k in track.keys:
            if not k.rotation.is_unit(tol=1e-4):
                issues.append(
                    ValidationIssue(
                        ERROR,
                        "DenormalizedRotation",
                        f"joint {name!r}: |q|={k.rotation.norm():.4g} at t={k.time:g}",
                        name,
                        k.time,
                    )
                )
        if _track_has_motion(track):
            motion.append(name)

    if c.root_motion:
        check_times(None, [k.time for k in c.root_motion], "root motion")
    for track in c.extra_translation_tracks:
        if track.joint_name not in known_set:
            issues.append(
                ValidationIssue(
                    ERROR,
                    "UnknownJoint",
                    f"no joint named {track.joint_name!r} in skeleton",
                    track.joint_name,
                )
            )
        elif track.keys:
            check_times(track.joint_name, [k.time for k in track.keys], f"translation {track.joint_name!r}")

    untracked = [n for n in known if n not in seen_tracks]
    for name in untracked:
        issues.append(
            ValidationIssue(INFO, "UntrackedJoint", f"joint {name!r} has no track (holds rest pose)", name)
        )

    return ValidationReport(
        issues=tuple(issues),
        tracked_joints=tuple(tracked),
        motion_joints=tuple(motion),
        untracked_joints=tuple(untracked),
    )


def _normalize_rotation_keys(keys: tuple[RotationKey, ...]) -> tuple[RotationKey, ...]:
    cleaned: list[RotationKey] = []
    for k in sorted(keys, key=lambda k: k.time):
        n = k.rotation.norm()
        if n < _MIN_NORM or not math.isfinite(n):
            raise DegenerateRotation(
                f"rotation norm {n:.4g} at t={k.time:g} is below {_MIN_NORM}"
            )
        q = k.rotation.normalized()
        if cleaned and cleaned[-1].time == k.time:
            cleaned[-1] = RotationKey(k.time, q)  # last occurrence wins
        else:
            cleaned.append(RotationKey(k.time, q))
    # Sign continuity: q and -q encode the same rotation; keep dots >= 0 so
    # interpolation never takes the long way after 1-sig-fig quantization.
    for i in range(1, len(cleaned)):
        if cleaned[i - 1].rotation.dot(cleaned[i].rotation) < 0:
            cleaned[i] = RotationKey(cleaned[i].time, cleaned[i].rotation.negated())
    return tuple(cleaned)


def _normalize_translation_keys(keys: tuple[TranslationKey, ...]) -> tuple[TranslationKey, ...]:
    cleaned: list[TranslationKey] = []
    for k in sorted(keys, key=lambda k: k.time):
        if cleaned and cleaned[-1].time == k.time:
            cleaned[-1] = k
        else:
            cleaned.append(k)
    return tuple(cleaned)


def normalize(c: Clip) -> Clip:
    """Repair pass: renormalize rotations (DegenerateRotation below norm
    0.1), sort keys, collapse duplicate times keeping the last, and apply
    per-track sign continuity. Exactly idempotent."""
    tracks = tuple(
        RotationTrack(t.joint_name, _normalize_rotation_keys(t.keys))
        for t in c.rotation_tracks
    )
    extra = tuple(
        TranslationTrack(t.joint_name, _normalize_translation_keys(t.keys))
        for t in c.extra_translation_tracks
    )
    return replace(
        c,
        rotation_tracks=tracks,
        root_motion=_normalize_translation_keys(c.root_motion),
        extra_translation_tracks=extra,
    )


def clips_equal(a: Clip, b: Clip, tol: float = 1e-6) -> bool:
    """Key-level equality; rotations compare up to sign (|dot| >= 1 - tol)."""
    if a.name != b.name or abs(a.duration - b.duration) > tol:
        return False
    if len(a.rotation_tracks) != len(b.rotation_tracks):
        return False
    for ta, tb in zip(a.rotation_tracks, b.rotation_tracks):
        if ta.joint_name != tb.joint_name or len(ta.keys) != len(tb.keys):
            return False
        for ka, kb in zip(ta.keys, tb.keys):
            if abs(ka.time - kb.time) > tol:
                return False
            if abs(ka.rotation.dot(kb.rotation)) < 1.0 - tol:
                return False
    if len(a.root_motion) != len(b.root_motion):
        return False
    for ka, kb in zip(a.root_motion, b.root_motion):
        if abs(ka.time - kb.time) > tol:
            return False
        d = ka.translation - kb.translation
        if max(abs(d.x), abs(d.y), abs(d.z)) > tol:
            return False
    return True


# --- canonical clip JSON (.clip.json) ---------------------------------------


def clip_to_json(c: Clip) -> str:
    """Canonical clip JSON with the same number rules as object JSON."""
    out: list[str] = ["{"]
    out.append(f'  "name": {json.dumps(c.name)},')
    out.append(f'  "duration": {canonical_number(c.duration)},')
    if c.rotation_tracks:
        out.append('  "tracks": [')
        for i, t in enumerate(c.rotation_tracks):
            out.append("    {")
            out.append(f'      "joint": {json.dumps(t.joint_name)},')
            out.append('      "keys": [')
            for j, k in enumerate(t.keys):
                q = k.rotation
                row = (
                    f"        [{canonical_number(k.time)}, {canonical_number(q.x)}, "
                    f"{canonical_number(q.y)}, {canonical_number(q.z)}, {canonical_number(q.w)}]"
                )
                out.append(row + ("," if j < len(t.keys) - 1 else ""))
            out.append("      ]")
            out.append("    }" + ("," if i < len(c.rotation_tracks) - 1 else ""))
        out.append("  ],")
    else:
        out.append('  "tracks": [],')
    if c.root_motion:
        out.append('  "root": [')
        for j, k in enumerate(c.root_motion):
            v = k.translation
            row = (
                f"    [{canonical_number(k.time)}, {canonical_number(v.x)}, "
                f"{canonical_number(v.y)}, {canonical_number(v.z)}]"
            )
            out.append(row + ("," if j < len(c.root_motion) - 1 else ""))
        out.append("  ]")
    else:
        out.append('  "root": []')
    out.append("}")
    return "\n".join(out) + "\n"


class MalformedClipJson(RigmotionError):
    pass


def clip_from_json(text: str) -> Clip:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedClipJson(f"invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise MalformedClipJson("clip JSON must be an object")
    try:
        name = str(data["name"])
        duration = float(data["duration"])
        tracks = []
        for t in data.get("tracks", []):
            keys = tuple(
                RotationKey(float(k[0]), Quaternion(float(k[1]), float(k[2]), float(k[3]), float(k[4])))
                for k in t["keys"]
            )
            tracks.append(RotationTrack(str(t["joint"]), keys))
        root = tuple(
            TranslationKey(float(k[0]), Vec3(float(k[1]), float(k[2]), float(k[3])))
            for k in data.get("root", [])
        )
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise MalformedClipJson(f"bad clip structure: {e}") from e
    return Clip(name=name, duration=duration, rotation_tracks=tuple(tracks), root_motion=root)
