"""Clip sampling (slerp/lerp) and forward kinematics.

Sampling semantics: an animated rotation replaces the joint's rest
rotation; joints without a track hold their rest rotation. Translations
in a pose are deltas added on top of the rest translation (the root
motion track lands here; all other deltas are zero unless the per-joint
translation extension is used). Outside the key range a track holds its
boundary key; the clip edge behavior (clamp or loop) is caller-selected.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from .clip import Clip, validate_against
from .errors import RigmotionError
from .geometry import Quaternion, Vec3, lerp_vec3, slerp
from .skeleton import Joint, Skeleton


class InvalidClip(RigmotionError):
    def __init__(self, errors: list[str]):
        super().__init__("clip failed validation: " + "; ".join(errors))
        self.errors = errors


class MissingJointInPose(RigmotionError):
    def __init__(self, name: str):
        super().__init__(f"pose has no entry for joint {name!r}")
        self.name = name


CLAMP = "clamp"
LOOP = "loop"


@dataclass(frozen=True)
class JointPose:
    rotation: Quaternion
    translation: Vec3  # delta on top of rest_translation


Pose = dict[str, JointPose]


@dataclass(frozen=True)
class WorldJoint:
    rotation: Quaternion
    position: Vec3


WorldPose = dict[str, WorldJoint]


def _map_time(t: float, duration: float, edge: str) -> float:
    if edge == LOOP:
        if duration <= 0:
            return 0.0
        return t % duration
    if edge == CLAMP:
        return min(max(t, 0.0), duration)
    raise ValueError(f"edge must be 'clamp' or 'loop', got {edge!r}")


def _sample_rotation(times: list[float], keys, t: float) -> Quaternion:
    if t <= times[0]:
        return keys[0].rotation
    if t >= times[-1]:
        return keys[-1].rotation
    hi = bisect.bisect_right(times, t)
    lo = hi - 1
    span = times[hi] - times[lo]
    u = (t - times[lo]) / span if span > 0 else 0.0
    return slerp(keys[lo].rotation, keys[hi].rotation, u)


def _sample_translation(times: list[float], keys, t: float) -> Vec3:
    if t <= times[0]:
        return keys[0].translation
    if t >= times[-1]:
        return keys[-1].translation
    hi = bisect.bisect_right(times, t)
    lo = hi - 1
    span = times[hi] - times[lo]
    u = (t - times[lo]) / span if span > 0 else 0.0
    return lerp_vec3(keys[lo].translation, keys[hi].translation, u)


class _Sampler:
    """Precomputed track lookup for repeated sampling of one clip."""

    def __init__(self, c: Clip, s: Skeleton):
        report = validate_against(c, s)
        if not report.is_valid:
            raise InvalidClip(report.error_messages())
        self.clip = c
        self.skeleton = s
        self.rotation = {
            t.joint_name: ([k.time for k in t.keys], t.keys) for t in c.rotation_tracks
        }
        self.translation = {
            t.joint_name: ([k.time for k in t.keys], t.keys)
            for t in c.extra_translation_tracks
            if t.keys
        }
        self.root_times = [k.time for k in c.root_motion]

    def pose_at(self, t: float, edge: str) -> Pose:
        t = _map_time(t, self.clip.duration, edge)
        pose: Pose = {}
        stack = [self.skeleton.root]
        while stack:
            joint = stack.pop()
            rot = joint.rest_rotation
            entry = self.rotation.get(joint.name)
            if entry:
                rot = _sample_rotation(entry[0], entry[1], t)
            delta = Vec3()
            tentry = self.translation.get(joint.name)
            if tentry:
                delta = _sample_translation(tentry[0], tentry[1], t)
            if joint is self.skeleton.root and self.root_times:
                delta = delta + _sample_translation(self.root_times, self.clip.root_motion, t)
            pose[joint.name] = JointPose(rot, delta)
            stack.extend(joint.children)
        return pose


def sample(c: Clip, s: Skeleton, t: float, edge: str = CLAMP) -> Pose:
    """Pose of every joint at time t. Raises InvalidClip when
    validate_against(c, s) reports errors."""
    return _Sampler(c, s).pose_at(t, edge)


def forward_kinematics(s: Skeleton, p: Pose) -> WorldPose:
    """World rotation and position per joint by pre-order composition:
    child rotation = parent_rotation * local_rotation, child position =
    parent_position + parent_rotation . (rest_translation + pose delta)."""
    world: WorldPose = {}

    def visit(joint: Joint, parent: WorldJoint | None) -> None:
        local = p.get(joint.name)
        if local is None:
            raise MissingJointInPose(joint.name)
        offset = joint.rest_translation + local.translation
        if parent is None:
            wj = WorldJoint(local.rotation, offset)
        else:
            wj = WorldJoint(
                parent.rotation * local.rotation,
                parent.position + parent.rotation.rotate(offset),
            )
        world[joint.name] = wj
        for child in joint.children:
            visit(child, wj)

    visit(s.root, None)
    return world


def frame_times(duration: float, fps: float) -> list[float]:
    """Sample grid 0, 1/fps, ... plus a final sample exactly at duration
    when the duration is off-grid."""
    if fps <= 0:
        raise ValueError("fps must be > 0")
    count = math.floor(duration * fps + 1e-9)
    times = [i / fps for i in range(count + 1)]
    if times[-1] < duration - 1e-9:
        times.append(duration)
    else:
        times[-1] = min(times[-1], duration)
    return times


def sample_series(
    c: Clip, s: Skeleton, fps: float, edge: str = CLAMP
) -> list[tuple[float, WorldPose]]:
    sampler = _Sampler(c, s)
    return [
        (t, forward_kinematics(s, sampler.pose_at(t, edge)))
        for t in frame_times(c.duration, fps)
    ]


def series_to_csv(series: list[tuple[float, WorldPose]], s: Skeleton) -> str:
    """CSV export, one row per joint per sample, 6-decimal fixed format."""
    from .skeleton import joint_names

    names = joint_names(s)
    lines = ["t,joint,px,py,pz,rx,ry,rz,rw"]
    for t, world in series:
        for name in names:
            wj = world[name]
            p, r = wj.position, wj.rotation
            lines.append(
                f"{t:.6f},{name},{p.x:.6f},{p.y:.6f},{p.z:.6f},"
                f"{r.x:.6f},{r.y:.6f},{r.z:.6f},{r.w:.6f}"
            )
    return "\n".join(lines) + "\n"
