"""Joint-hierarchy model and the object-JSON codec.

The object JSON is what gets pasted into metaprompts so the model knows
which joints exist. The schema here is a reconstruction (the original
exporter's format was never published): one nested JSON object per joint
with keys, in canonical order, ``name``, ``rest_translation`` ([x, y, z]),
``rest_rotation`` ([x, y, z, w]) and ``children``. Rest fields are
optional on input and default to zero translation / identity rotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import RigmotionError
from .geometry import Quaternion, Vec3
from .numfmt import canonical_number


class MalformedJson(RigmotionError):
    pass


class DuplicateJointName(RigmotionError):
    def __init__(self, name: str):
        super().__init__(f"duplicate joint name: {name!r}")
        self.name = name


class NotATree(RigmotionError):
    pass


class DegenerateRotation(RigmotionError):
    pass


# Rest rotations with a norm this far from 1 are treated as corrupt input
# rather than silently renormalized.
_RENORM_LO = 0.5
_RENORM_HI = 1.5


@dataclass(frozen=True)
class Joint:
    name: str
    rest_translation: Vec3 = field(default_factory=Vec3)
    rest_rotation: Quaternion = field(default_factory=Quaternion.identity)
    children: tuple["Joint", ...] = ()


@dataclass(frozen=True)
class Skeleton:
    object_name: str
    root: Joint

    @classmethod
    def from_root(cls, root: Joint) -> "Skeleton":
        return cls(object_name=root.name, root=root)


def joint_names(s: Skeleton) -> list[str]:
    """Pre-order depth-first joint names; one entry per joint."""
    names: list[str] = []
    stack = [s.root]
    while stack:
        j = stack.pop()
        names.append(j.name)
        stack.extend(reversed(j.children))
    return names


def parent_map(s: Skeleton) -> dict[str, str | None]:
    """joint name -> parent name (None for the root)."""
    parents: dict[str, str | None] = {s.root.name: None}
    stack = [s.root]
    while stack:
        j = stack.pop()
        for c in j.children:
            parents[c.name] = j.name
            stack.append(c)
    return parents


def joint_count(s: Skeleton) -> int:
    return len(joint_names(s))


def find_joint(s: Skeleton, name: str) -> Joint | None:
    stack = [s.root]
    while stack:
        j = stack.pop()
        if j.name == name:
            return j
        stack.extend(j.children)
    return None


def _parse_vec3(raw, where: str) -> Vec3:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise MalformedJson(f"{where}: expected [x, y, z], got {raw!r}")
    try:
        v = Vec3(float(raw[0]), float(raw[1]), float(raw[2]))
    except (TypeError, ValueError) as e:
        raise MalformedJson(f"{where}: non-numeric component") from e
    if not v.is_finite():
        raise MalformedJson(f"{where}: non-finite component")
    return v


def _parse_quat(raw, where: str) -> Quaternion:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise MalformedJson(f"{where}: expected [x, y, z, w], got {raw!r}")
    try:
        q = Quaternion(float(raw[0]), float(raw[1]), float(raw[2]), float(raw[3]))
    except (TypeError, ValueError) as e:
        raise MalformedJson(f"{where}: non-numeric component") from e
    n = q.norm()
    if not (_RENORM_LO <= n <= _RENORM_HI):
        raise DegenerateRotation(f"{where}: rotation norm {n:.4g} outside [0.5, 1.5]")
    return q.normalized()


def _joint_fingerprint(j: Joint) -> tuple:
    return (
        j.name,
        j.rest_translation.as_tuple(),
        j.rest_rotation.as_tuple(),
        tuple(_joint_fingerprint(c) for c in j.children),
    )


def _parse_joint(node, seen: dict[str, tuple], path: str, depth: int) -> Joint:
    if depth > 256:
        raise NotATree(f"{path}: joint nesting deeper than 256 levels")
    if not isinstance(node, dict):
        raise MalformedJson(f"{path}: joint must be a JSON object, got {type(node).__name__}")
    name = node.get("name")
    if not isinstance(name, str) or not name:
        raise MalformedJson(f"{path}: missing or empty joint name")
    where = f"joint {name!r}"
    translation = Vec3()
    if "rest_translation" in node:
        translation = _parse_vec3(node["rest_translation"], where)
    rotation = Quaternion.identity()
    if "rest_rotation" in node:
        rotation = _parse_quat(node["rest_rotation"], where)
    raw_children = node.get("children", [])
    if not isinstance(raw_children, list):
        raise MalformedJson(f"{where}: children must be a list")
    children = tuple(
        _parse_joint(c, seen, f"{path}/{name}", depth + 1) for c in raw_children
    )
    joint = Joint(name, translation, rotation, children)
    fp = _joint_fingerprint(joint)
    if name in seen:
        # An identical repeated subtree means one node was given two
        # parents (a DAG flattened into JSON); a differing one is two
        # distinct joints that merely collide on name.
        if seen[name] == fp:
            raise NotATree(f"joint {name!r} appears under two parents")
        raise DuplicateJointName(name)
    seen[name] = fp
    return joint


def parse_object_json(text: str) -> Skeleton:
    """Parse object JSON into a Skeleton.

    Raises MalformedJson, DuplicateJointName, NotATree or
    DegenerateRotation; never returns a skeleton violating the tree and
    unique-name invariants.
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, RecursionError) as e:
        raise MalformedJson(f"invalid JSON: {e}") from e
    root = _parse_joint(data, {}, "", 0)
    return Skeleton.from_root(root)


def _write_joint(j: Joint, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    t = j.rest_translation
    r = j.rest_rotation
    out.append(pad + "{")
    out.append(f'{inner}"name": {json.dumps(j.name)},')
    out.append(
        f'{inner}"rest_translation": [{canonical_number(t.x)}, '
        f"{canonical_number(t.y)}, {canonical_number(t.z)}],"
    )
    out.append(
        f'{inner}"rest_rotation": [{canonical_number(r.x)}, {canonical_number(r.y)}, '
        f"{canonical_number(r.z)}, {canonical_number(r.w)}],"
    )
    if j.children:
        out.append(f'{inner}"children": [')
        for i, c in enumerate(j.children):
            _write_joint(c, indent + 2, out)
            if i < len(j.children) - 1:
                out[-1] += ","
        out.append(f"{inner}]")
    else:
        out.append(f'{inner}"children": []')
    out.append(pad + "}")


def serialize_object_json(s: Skeleton) -> str:
    """Canonical object JSON: fixed key order, <= 6 decimal places, no
    exponents, 2-space indent, trailing newline. Bit-exact for golden
    files; parse(serialize(s)) reproduces the tree within 1e-6."""
    out: list[str] = []
    _write_joint(s.root, 0, out)
    return "\n".join(out) + "\n"


def skeletons_equal(a: Skeleton, b: Skeleton, tol: float = 1e-6) -> bool:
    """Structural tree equality with numeric tolerance (object_name is
    prompt metadata carried out-of-band and is not compared)."""

    def eq(x: Joint, y: Joint) -> bool:
        if x.name != y.name or len(x.children) != len(y.children):
            return False
        dt = x.rest_translation - y.rest_translation
        if max(abs(dt.x), abs(dt.y), abs(dt.z)) > tol:
            return False
        if min(
            max(abs(a1 - b1) for a1, b1 in zip(x.rest_rotation.as_tuple(), y.rest_rotation.as_tuple())),
            max(abs(a1 + b1) for a1, b1 in zip(x.rest_rotation.as_tuple(), y.rest_rotation.as_tuple())),
        ) > tol:
            return False
        return all(eq(cx, cy) for cx, cy in zip(x.children, y.children))

    return eq(a.root, b.root)
