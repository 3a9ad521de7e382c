import math
import random

import pytest

from rigmotion.animstring import parse_animstring, to_clip
from rigmotion.clip import (
    Clip,
    RotationKey,
    RotationTrack,
    TranslationKey,
    clip_from_json,
    clip_to_json,
    clips_equal,
    normalize,
    validate_against,
)
from rigmotion.geometry import Quaternion, Vec3, geodesic_angle
from rigmotion.kinematics import forward_kinematics, sample
from rigmotion.skeleton import DegenerateRotation

from conftest import quat_z, random_clip, random_skeleton


def one_track_clip(joint: str, keys, duration=2.0) -> Clip:
    return Clip(name="t", duration=duration, rotation_tracks=(RotationTrack(joint, tuple(keys)),))


def test_unknown_joint_reported(whale):
    clip = one_track_clip("Tail", [RotationKey(0.0, Quaternion.identity())])
    report = validate_against(clip, whale)
    errors = [i for i in report.errors if i.code == "UnknownJoint"]
    assert len(errors) == 1
    assert not report.is_valid


def test_out_of_range_time(whale):
    clip = one_track_clip("Head", [RotationKey(2.5, Quaternion.identity())], duration=2.0)
    report = validate_against(clip, whale)
    assert any(i.code == "OutOfRangeTime" for i in report.errors)


def test_non_monotone_times(whale):
    clip = one_track_clip(
        "Head",
        [RotationKey(1.0, Quaternion.identity()), RotationKey(0.5, Quaternion.identity())],
    )
    report = validate_against(clip, whale)
    assert any(i.code == "NonMonotoneTime" for i in report.errors)


def test_denormalized_rotation_flagged(whale):
    clip = one_track_clip("Head", [RotationKey(0.0, Quaternion(0, 0, 0, 1.3))])
    report = validate_against(clip, whale)
    assert any(i.code == "DenormalizedRotation" for i in report.errors)


def test_swim_fixture_is_clean(whale, swim_text):
    clip = to_clip(parse_animstring(swim_text))
    report = validate_against(clip, whale)
    assert report.is_valid
    assert report.errors == ()
    # untracked joints are info, not errors
    assert set(report.untracked_joints) == {"Armature", "Head"}


def test_motion_joints_excludes_static_tracks(whale):
    static = RotationTrack(
        "Spine",
        (RotationKey(0.0, quat_z(0.3)), RotationKey(1.0, quat_z(0.3))),
    )
    moving = RotationTrack(
        "Head",
        (RotationKey(0.0, Quaternion.identity()), RotationKey(1.0, quat_z(0.4))),
    )
    clip = Clip(name="t", duration=1.0, rotation_tracks=(static, moving))
    report = validate_against(clip, whale)
    assert report.motion_joints == ("Head",)
    assert set(report.tracked_joints) == {"Spine", "Head"}


def test_normalize_scales_quaternion():
    clip = one_track_clip("a", [RotationKey(0.0, Quaternion(0, 0, 0, 2.0))])
    out = normalize(clip)
    assert out.rotation_tracks[0].keys[0].rotation == Quaternion(0, 0, 0, 1.0)


def test_normalize_sorts_keys():
    clip = one_track_clip(
        "a", [RotationKey(1.0, quat_z(0.1)), RotationKey(0.5, quat_z(0.2))]
    )
    out = normalize(clip)
    assert [k.time for k in out.rotation_tracks[0].keys] == [0.5, 1.0]


def test_normalize_duplicate_times_keep_last():
    clip = one_track_clip(
        "a",
        [RotationKey(0.5, quat_z(0.1)), RotationKey(0.5, quat_z(0.9)), RotationKey(1.0, quat_z(0.2))],
    )
    out = normalize(clip)
    keys = out.rotation_tracks[0].keys
    assert len(keys) == 2
    assert geodesic_angle(keys[0].rotation, quat_z(0.9)) < 1e-12


def test_normalize_sign_continuity_preserves_sampled_motion(whale):
    q0 = quat_z(0.4)
    clip = Clip(
        name="t",
        duration=1.0,
        rotation_tracks=(
            RotationTrack("Head", (RotationKey(0.0, q0), RotationKey(1.0, q0.negated()))),
        ),
    )
    out = normalize(clip)
    keys = out.rotation_tracks[0].keys
    assert keys[0].rotation.dot(keys[1].rotation) >= 0
    # FK pose at the second key time is unchanged by the flip
    for t in (0.0, 1.0):
        before = forward_kinematics(whale, sample(clip, whale, t))
        after = forward_kinematics(whale, sample(out, whale, t))
        for name in before:
            assert geodesic_angle(before[name].rotation, after[name].rotation) < 1e-9


def test_normalize_rejects_tiny_norm():
    clip = one_track_clip("a", [RotationKey(0.0, Quaternion(0, 0, 0, 0.05))])
    with pytest.raises(DegenerateRotation):
        normalize(clip)


def test_normalize_idempotent_exactly():
    rng = random.Random(11)
    for _ in range(20):
        skeleton = random_skeleton(rng)
        clip = normalize(random_clip(rng, skeleton))
        assert normalize(clip) == clip


def test_normalize_never_changes_represented_rotation():
    rng = random.Random(13)
    skeleton = random_skeleton(rng)
    clip = random_clip(rng, skeleton)
    out = normalize(clip)
    for before, after in zip(clip.rotation_tracks, out.rotation_tracks):
        # compare at surviving key times (duplicates collapse to last)
        after_by_time = {k.time: k.rotation for k in after.keys}
        last_by_time = {}
        for k in before.keys:
            last_by_time[k.time] = k.rotation
        for t, q in last_by_time.items():
            assert abs(after_by_time[t].dot(q.normalized())) >= 1.0 - 1e-6


def test_clip_json_round_trip(whale, swim_text):
    clip = to_clip(parse_animstring(swim_text))
    text = clip_to_json(clip)
    again = clip_from_json(text)
    assert clips_equal(clip, again)
    assert clip_to_json(again) == text


def test_clip_json_has_fixed_key_order(swim_text):
    text = clip_to_json(to_clip(parse_animstring(swim_text)))
    assert text.index('"name"') < text.index('"duration"') < text.index('"tracks"') < text.index('"root"')
