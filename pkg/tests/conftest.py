import math
import random

import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from rigmotion import fixtures
from rigmotion.clip import Clip, RotationKey, RotationTrack, TranslationKey
from rigmotion.geometry import Quaternion, Vec3
from rigmotion.skeleton import Skeleton, parse_object_json


@pytest.fixture
def whale() -> Skeleton:
    return parse_object_json(fixtures.whale_object_json())


@pytest.fixture
def lamp() -> Skeleton:
    return parse_object_json(fixtures.lamp_object_json())


@pytest.fixture
def swim_text() -> str:
    return fixtures.whale_swim_animstring()


FLAP_TEXT = """ANIMATION Flap
DURATION 2
JOINT Tail
(0, 0, 0.3, 0.9, 0)
(0, 0, -0.3, 0.9, 1)
END
"""


@pytest.fixture
def flap_text() -> str:
    return FLAP_TEXT


def quat_z(angle: float) -> Quaternion:
    return Quaternion(0.0, 0.0, math.sin(angle / 2.0), math.cos(angle / 2.0))


def sine_wag_clip(n_keys: int = 60, amplitude: float = 0.4, duration: float = 2.0) -> Clip:
    """Dense sine-wave tail wag: rotation about z, one full period."""
    keys = []
    for i in range(n_keys):
        t = duration * i / (n_keys - 1)
        angle = amplitude * math.sin(2.0 * math.pi * t / duration)
        keys.append(RotationKey(t, quat_z(angle)))
    return Clip(
        name="Wag",
        duration=duration,
        rotation_tracks=(RotationTrack("TailBase", tuple(keys)),),
    )


def random_unit_quaternion(rng: random.Random) -> Quaternion:
    # Gaussian 4-vector normalized: uniform on S^3
    while True:
        q = Quaternion(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        n = q.norm()
        if n > 1e-3:
            return Quaternion(q.x / n, q.y / n, q.z / n, q.w / n)


def random_skeleton(rng: random.Random, max_joints: int = 8) -> Skeleton:
    """Random tree with random rest transforms, joints j0..jN."""
    from rigmotion.skeleton import Joint

    count = rng.randint(1, max_joints)
    children: dict[int, list[int]] = {i: [] for i in range(count)}
    for i in range(1, count):
        children[rng.randrange(i)].append(i)

    def build(i: int) -> Joint:
        return Joint(
            name=f"j{i}",
            rest_translation=Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)),
            rest_rotation=random_unit_quaternion(rng),
            children=tuple(build(c) for c in children[i]),
        )

    return Skeleton.from_root(build(0))


def random_clip(rng: random.Random, skeleton: Skeleton, max_keys: int = 20) -> Clip:
    from rigmotion.skeleton import joint_names

    duration = rng.uniform(0.5, 10.0)
    tracks = []
    names = joint_names(skeleton)
    for name in names:
        if rng.random() < 0.3 and len(tracks) < len(names) - 1:
            continue  # leave some joints untracked
        n = rng.randint(1, max_keys)
        times = sorted(rng.sample([i * duration / (max_keys * 2) for i in range(max_keys * 2 + 1)], n))
        keys = tuple(RotationKey(t, random_unit_quaternion(rng)) for t in times)
        tracks.append(RotationTrack(name, keys))
    root = ()
    if rng.random() < 0.5:
        n = rng.randint(1, 5)
        times = sorted(rng.sample([i * duration / 10 for i in range(11)], n))
        root = tuple(
            TranslationKey(t, Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)))
            for t in times
        )
    if not tracks and not root:
        # grammar v1 has no representation for a keyless clip
        tracks.append(
            RotationTrack(names[0], (RotationKey(0.0, random_unit_quaternion(rng)),))
        )
    return Clip(name="Rand", duration=duration, rotation_tracks=tuple(tracks), root_motion=root)
