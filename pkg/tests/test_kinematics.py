import math
import random

import numpy as np
import pytest

from rigmotion.animstring import parse_animstring, to_clip
from rigmotion.clip import Clip, RotationKey, RotationTrack, TranslationKey
from rigmotion.geometry import Quaternion, Vec3, geodesic_angle
from rigmotion.kinematics import (
    CLAMP,
    LOOP,
    InvalidClip,
    JointPose,
    MissingJointInPose,
    forward_kinematics,
    frame_times,
    sample,
    sample_series,
    series_to_csv,
)
from rigmotion.skeleton import Joint, Skeleton, joint_names

from conftest import quat_z, random_skeleton, random_unit_quaternion


# --- independent FK oracle: homogeneous 4x4 matrix composition ---------------


def quat_to_matrix(q: Quaternion) -> np.ndarray:
    x, y, z, w = q.x, q.y, q.z, q.w
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def homogeneous(q: Quaternion, t: Vec3) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = quat_to_matrix(q)
    m[:3, 3] = [t.x, t.y, t.z]
    return m


def fk_matrix_oracle(skeleton: Skeleton, pose) -> dict[str, np.ndarray]:
    """World transform per joint via 4x4 matrix products (no quaternion
    composition)."""
    out: dict[str, np.ndarray] = {}

    def visit(joint: Joint, parent: np.ndarray | None):
        jp = pose[joint.name]
        local = homogeneous(jp.rotation, joint.rest_translation + jp.translation)
        world = local if parent is None else parent @ local
        out[joint.name] = world
        for c in joint.children:
            visit(c, world)

    visit(skeleton.root, None)
    return out


def random_pose(rng: random.Random, skeleton: Skeleton):
    return {
        name: JointPose(
            random_unit_quaternion(rng),
            Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
        )
        for name in joint_names(skeleton)
    }


def two_joint_chain() -> Skeleton:
    return Skeleton.from_root(
        Joint("root", children=(Joint("child", rest_translation=Vec3(1, 0, 0)),))
    )


def simple_clip(keys, joint="child", duration=1.0) -> Clip:
    return Clip(name="c", duration=duration, rotation_tracks=(RotationTrack(joint, tuple(keys)),))


# --- sample -------------------------------------------------------------------


def test_sample_at_key_time_is_exact():
    q0, q1 = quat_z(0.0), quat_z(1.0)
    clip = simple_clip([RotationKey(0.0, q0), RotationKey(1.0, q1)])
    s = two_joint_chain()
    assert sample(clip, s, 0.0)["child"].rotation == q0
    assert sample(clip, s, 1.0)["child"].rotation == q1


def test_sample_midpoint_is_45_degrees():
    clip = simple_clip(
        [RotationKey(0.0, Quaternion.identity()), RotationKey(1.0, Quaternion(0, 0, 0.7071068, 0.7071068))]
    )
    s = two_joint_chain()
    q = sample(clip, s, 0.5)["child"].rotation
    assert abs(q.z - 0.3826834) < 1e-6
    assert abs(q.w - 0.9238795) < 1e-6


def test_sample_holds_outside_key_range():
    clip = simple_clip([RotationKey(0.25, quat_z(0.3)), RotationKey(0.75, quat_z(0.6))])
    s = two_joint_chain()
    assert sample(clip, s, 0.0)["child"].rotation == quat_z(0.3)
    assert sample(clip, s, 1.0)["child"].rotation == quat_z(0.6)


def test_sample_loop_mode_wraps():
    clip = simple_clip(
        [RotationKey(0.0, quat_z(0.1)), RotationKey(2.0, quat_z(0.9))], duration=2.0
    )
    s = two_joint_chain()
    a = sample(clip, s, 2.5, edge=LOOP)["child"].rotation
    b = sample(clip, s, 0.5, edge=LOOP)["child"].rotation
    assert a == b  # 2.5 mod 2.0 is exactly 0.5, so the samples are identical


def test_sample_clamp_mode():
    clip = simple_clip([RotationKey(0.0, quat_z(0.1)), RotationKey(1.0, quat_z(0.9))])
    s = two_joint_chain()
    assert sample(clip, s, 5.0, edge=CLAMP)["child"].rotation == quat_z(0.9)


def test_untracked_joint_holds_rest_rotation():
    rest = quat_z(0.7)
    s = Skeleton.from_root(Joint("root", rest_rotation=rest))
    clip = Clip(name="c", duration=1.0)
    assert sample(clip, s, 0.5)["root"].rotation == rest


def test_root_motion_lerps():
    s = two_joint_chain()
    clip = Clip(
        name="c",
        duration=2.0,
        root_motion=(TranslationKey(0.0, Vec3(0, 0, 0)), TranslationKey(2.0, Vec3(4, 0, 0))),
    )
    pose = sample(clip, s, 0.5)
    assert abs(pose["root"].translation.x - 1.0) < 1e-12


def test_sample_rejects_invalid_clip():
    s = two_joint_chain()
    clip = simple_clip([RotationKey(0.0, Quaternion.identity())], joint="nope")
    with pytest.raises(InvalidClip):
        sample(clip, s, 0.0)


def test_sample_bad_edge_mode():
    s = two_joint_chain()
    clip = simple_clip([RotationKey(0.0, Quaternion.identity())])
    with pytest.raises(ValueError):
        sample(clip, s, 0.0, edge="bounce")


# --- forward kinematics ---------------------------------------------------------


def test_fk_identity_pose_accumulates_rest_offsets(whale):
    pose = {name: JointPose(Quaternion.identity(), Vec3()) for name in joint_names(whale)}
    world = forward_kinematics(whale, pose)
    assert world["Armature"].position == Vec3(0, 0, 0)
    assert abs(world["Spine"].position.x - 0.5) < 1e-12
    assert abs(world["Head"].position.x - 1.3) < 1e-12
    assert abs(world["TailBase"].position.x - (-0.3)) < 1e-12
    assert abs(world["TailTip"].position.x - (-1.0)) < 1e-12


def test_fk_rotated_root_moves_child():
    s = two_joint_chain()
    pose = {
        "root": JointPose(quat_z(math.pi / 2), Vec3()),
        "child": JointPose(Quaternion.identity(), Vec3()),
    }
    world = forward_kinematics(s, pose)
    p = world["child"].position
    assert abs(p.x) < 1e-6 and abs(p.y - 1.0) < 1e-6 and abs(p.z) < 1e-6


def test_fk_missing_joint_raises():
    s = two_joint_chain()
    with pytest.raises(MissingJointInPose):
        forward_kinematics(s, {"root": JointPose(Quaternion.identity(), Vec3())})


def test_fk_matches_matrix_oracle_on_random_instances():
    rng = random.Random(2024)
    for _ in range(100):
        skeleton = random_skeleton(rng, max_joints=8)
        pose = random_pose(rng, skeleton)
        got = forward_kinematics(skeleton, pose)
        want = fk_matrix_oracle(skeleton, pose)
        for name, m in want.items():
            p = got[name].position
            assert np.allclose([p.x, p.y, p.z], m[:3, 3], atol=1e-5)
            r = quat_to_matrix(got[name].rotation)
            assert np.allclose(r, m[:3, :3], atol=1e-5)


# --- sample_series ----------------------------------------------------------------


def test_frame_times_on_grid():
    assert frame_times(1.0, 4) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_frame_times_off_grid_appends_duration():
    assert frame_times(1.1, 2) == [0.0, 0.5, 1.0, 1.1]


def test_frame_times_rejects_bad_fps():
    with pytest.raises(ValueError):
        frame_times(1.0, 0)


def test_sample_series_whale_all_unit(whale, swim_text):
    clip = to_clip(parse_animstring(swim_text))
    series = sample_series(clip, whale, 30)
    assert len(series) == 61
    for _, world in series:
        for wj in world.values():
            assert abs(wj.rotation.norm() - 1.0) <= 1e-6


def test_series_csv_shape(whale, swim_text):
    clip = to_clip(parse_animstring(swim_text))
    series = sample_series(clip, whale, 4)
    csv = series_to_csv(series, whale)
    lines = csv.strip().split("\n")
    assert lines[0] == "t,joint,px,py,pz,rx,ry,rz,rw"
    assert len(lines) == 1 + 9 * 5  # 9 samples x 5 joints
    assert lines[1].startswith("0.000000,Armature,")


def test_sample_continuity(whale, swim_text):
    # regression bound: angle step <= C * dt with C frozen from one
    # measurement of the swim fixture (max angular velocity 1.22 rad/s
    # on TailTip, which sweeps ~1.22 rad over 1 s)
    clip = to_clip(parse_animstring(swim_text))
    C = 1.5
    eps = 1e-4
    rng = random.Random(1)
    for _ in range(200):
        t = rng.uniform(0, clip.duration - eps)
        a = sample(clip, whale, t)
        b = sample(clip, whale, t + eps)
        for name in a:
            assert geodesic_angle(a[name].rotation, b[name].rotation) <= C * eps
