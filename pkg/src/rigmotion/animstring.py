"""Animation-string grammar v1: parser, serializer, quantizer, compressor.

The textual format exchanged with the LLM (see docs/animstring-v1.md):

    ANIMATION <name>
    DURATION <seconds>          (optional)
    JOINT <joint name>
    (q0, q1, q2, q3, t)         one keyframe per line, (x, y, z, w) order
    ...
    ROOT
    (x, y, z, t)
    ...
    END

The parser is total: any input yields an AnimDocument or a typed error
(AnimSyntaxError / ArityError / EmptyDocument), never a crash. It is
tolerant of surrounding markdown code fences, blank lines, trailing
commas inside tuples and arbitrary inline whitespace; keywords and
structure are otherwise strict so that error messages fed back to the
model stay actionable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .clip import (
    Clip,
    RotationKey,
    RotationTrack,
    TranslationKey,
    TranslationTrack,
    normalize,
)
from .errors import RigmotionError
from .geometry import Quaternion, Vec3, geodesic_angle, lerp_vec3, slerp
from .numfmt import QuantizeSpec, format_quantized, quantize

GRAMMAR_VERSION = "v1"

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_FENCE_RE = re.compile(r"^\s*```")


class AnimSyntaxError(RigmotionError):
    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        detail = f" (found {found!r})" if found else ""
        super().__init__(f"line {line}, column {column}: expected {expected}{detail}")
        self.line = line
        self.column = column
        self.expected = expected


class ArityError(RigmotionError):
    def __init__(self, section: str, line: int, got: int, want: int):
        super().__init__(
            f"line {line}: section {section!r} needs {want} numbers per tuple, got {got}"
        )
        self.section = section
        self.line = line


class EmptyDocument(RigmotionError):
    def __init__(self):
        super().__init__("animation string contains no content")


ROOT = "ROOT"


@dataclass(frozen=True)
class Section:
    joint_name: str | None  # None marks the ROOT section
    tuples: tuple[tuple[float, ...], ...]
    line: int = field(default=0, compare=False)  # diagnostics only

    @property
    def label(self) -> str:
        return ROOT if self.joint_name is None else self.joint_name

    @property
    def arity(self) -> int:
        return 4 if self.joint_name is None else 5


@dataclass(frozen=True)
class AnimDocument:
    name: str
    duration: float | None
    sections: tuple[Section, ...]


def _keyword_arg(stripped: str, keyword: str) -> str | None:
    """Text after a line-leading keyword, or None if the keyword is not
    followed by whitespace/end-of-line (so 'JOINTTail' is not a JOINT)."""
    if not stripped.startswith(keyword):
        return None
    rest = stripped[len(keyword):]
    if rest and not rest[0].isspace():
        return None
    return rest.strip()


def _parse_tuple_line(text: str, lineno: int, section: Section | None) -> tuple[float, ...]:
    stripped = text.strip()
    open_col = text.index("(") + 1
    if not stripped.endswith(")"):
        raise AnimSyntaxError(lineno, len(text.rstrip()) + 1, "')' closing the keyframe tuple")
    inner = stripped[1:-1].strip()
    if inner.endswith(","):  # tolerated trailing comma
        inner = inner[:-1]
    values: list[float] = []
    if inner:
        pos = open_col
        for part in inner.split(","):
            col = pos + (len(part) - len(part.lstrip()))
            pos += len(part) + 1
            part = part.strip()
            if not _NUMBER_RE.fullmatch(part):
                raise AnimSyntaxError(lineno, col + 1, "a number", part)
            value = float(part)
            if not math.isfinite(value):
                raise AnimSyntaxError(lineno, col + 1, "a finite number", part)
            values.append(value)
    if section is None:
        raise AnimSyntaxError(lineno, open_col, "'JOINT <name>' or 'ROOT' before keyframe tuples")
    if len(values) != section.arity:
        raise ArityError(section.label, lineno, len(values), section.arity)
    return tuple(values)


def parse_animstring(text: str) -> AnimDocument:
    """Parse grammar-v1 text into an AnimDocument with raw, unnormalized
    numbers. See module docstring for accepted tolerances."""
    if not isinstance(text, str):
        raise EmptyDocument()
    lines = text.split("\n")
    meaningful: list[tuple[int, str]] = []
    for i, raw in enumerate(lines, start=1):
        if _FENCE_RE.match(raw):
            continue
        if raw.strip():
            meaningful.append((i, raw))
    if not meaningful:
        raise EmptyDocument()

    idx = 0
    lineno, line = meaningful[idx]
    stripped = line.strip()
    name = _keyword_arg(stripped, "ANIMATION")
    if name is None:
        raise AnimSyntaxError(lineno, 1, "'ANIMATION <name>'", stripped.split()[0])
    if not name:
        raise AnimSyntaxError(lineno, len("ANIMATION") + 2, "an animation name")
    idx += 1

    duration: float | None = None
    if idx < len(meaningful):
        lineno, line = meaningful[idx]
        stripped = line.strip()
        value = _keyword_arg(stripped, "DURATION")
        if value is not None:
            if not _NUMBER_RE.fullmatch(value):
                raise AnimSyntaxError(lineno, len("DURATION") + 2, "a number", value)
            duration = float(value)
            if not math.isfinite(duration):
                raise AnimSyntaxError(lineno, len("DURATION") + 2, "a finite number", value)
            idx += 1

    sections: list[Section] = []
    current: Section | None = None
    tuples: list[tuple[float, ...]] = []
    ended = False

    def close_section() -> None:
        nonlocal current, tuples
        if current is not None:
            if not tuples:
                raise AnimSyntaxError(
                    current.line, 1, f"at least one keyframe tuple in section {current.label!r}"
                )
            sections.append(replace(current, tuples=tuple(tuples)))
        current = None
        tuples = []

    while idx < len(meaningful):
        lineno, line = meaningful[idx]
        stripped = line.strip()
        idx += 1
        if stripped == "END":
            ended = True
            break
        joint = _keyword_arg(stripped, "JOINT")
        if stripped == ROOT:
            close_section()
            current = Section(None, (), lineno)
        elif joint is not None:
            if not joint:
                raise AnimSyntaxError(lineno, len("JOINT") + 2, "a joint name")
            close_section()
            current = Section(joint, (), lineno)
        elif stripped.startswith("("):
            tuples.append(_parse_tuple_line(line, lineno, current))
        else:
            raise AnimSyntaxError(
                lineno, 1, "'JOINT <name>', 'ROOT', a keyframe tuple, or 'END'",
                stripped.split()[0],
            )

    if not ended:
        last_line = meaningful[-1][0]
        raise AnimSyntaxError(last_line + 1, 1, "'END'")
    close_section()
    if not sections:
        raise AnimSyntaxError(lineno, 1, "at least one JOINT or ROOT section before 'END'")
    if idx < len(meaningful):
        extra_line, extra = meaningful[idx]
        raise AnimSyntaxError(extra_line, 1, "end of document after 'END'", extra.strip().split()[0])

    return AnimDocument(name=name, duration=duration, sections=tuple(sections))


def to_clip(doc: AnimDocument) -> Clip:
    """Build a normalized Clip from the AST. Repeated sections for one
    joint merge their keys; duration falls back to the latest key time
    when no DURATION line was declared."""
    rotation_keys: dict[str, list[RotationKey]] = {}
    joint_order: list[str] = []
    root_keys: list[TranslationKey] = []
    max_time = 0.0
    for section in doc.sections:
        for tup in section.tuples:
            t = tup[-1]
            max_time = max(max_time, t)
            if section.joint_name is None:
                root_keys.append(TranslationKey(t, Vec3(tup[0], tup[1], tup[2])))
            else:
                if section.joint_name not in rotation_keys:
                    rotation_keys[section.joint_name] = []
                    joint_order.append(section.joint_name)
                rotation_keys[section.joint_name].append(
                    RotationKey(t, Quaternion(tup[0], tup[1], tup[2], tup[3]))
                )
    clip = Clip(
        name=doc.name,
        duration=doc.duration if doc.duration is not None else max_time,
        rotation_tracks=tuple(
            RotationTrack(j, tuple(rotation_keys[j])) for j in joint_order
        ),
        root_motion=tuple(root_keys),
    )
    return normalize(clip)


def document_of_clip(c: Clip) -> AnimDocument:
    sections = [
        Section(t.joint_name, tuple((*k.rotation.as_tuple(), k.time) for k in t.keys), 0)
        for t in c.rotation_tracks
    ]
    if c.root_motion:
        sections.append(
            Section(None, tuple((*k.translation.as_tuple(), k.time) for k in c.root_motion), 0)
        )
    return AnimDocument(name=c.name, duration=c.duration, sections=tuple(sections))


def serialize_document(doc: AnimDocument, q: QuantizeSpec) -> str:
    """Canonical grammar-v1 text with every number quantized per spec."""
    if not doc.sections:
        raise ValueError("grammar v1 cannot express a document with no sections")
    out = [f"ANIMATION {doc.name}"]
    if doc.duration is not None:
        out.append(f"DURATION {format_quantized(doc.duration, q)}")
    for section in doc.sections:
        out.append(ROOT if section.joint_name is None else f"JOINT {section.joint_name}")
        for tup in section.tuples:
            out.append("(" + ", ".join(format_quantized(v, q) for v in tup) + ")")
    out.append("END")
    return "\n".join(out) + "\n"


def serialize_animstring(c: Clip, q: QuantizeSpec) -> str:
    return serialize_document(document_of_clip(c), q)


def quantize_clip(c: Clip, q: QuantizeSpec) -> Clip:
    """Quantize every number in the clip per spec, then normalize. This is
    exactly what a serialize -> parse -> to_clip round trip produces."""
    tracks = tuple(
        RotationTrack(
            t.joint_name,
            tuple(
                RotationKey(
                    quantize(k.time, q),
                    Quaternion(*(quantize(v, q) for v in k.rotation.as_tuple())),
                )
                for k in t.keys
            ),
        )
        for t in c.rotation_tracks
    )
    root = tuple(
        TranslationKey(
            quantize(k.time, q),
            Vec3(*(quantize(v, q) for v in k.translation.as_tuple())),
        )
        for k in c.root_motion
    )
    extra = tuple(
        TranslationTrack(
            t.joint_name,
            tuple(
                TranslationKey(
                    quantize(k.time, q),
                    Vec3(*(quantize(v, q) for v in k.translation.as_tuple())),
                )
                for k in t.keys
            ),
        )
        for t in c.extra_translation_tracks
    )
    return normalize(
        replace(
            c,
            duration=quantize(c.duration, q),
            rotation_tracks=tracks,
            root_motion=root,
            extra_translation_tracks=extra,
        )
    )


def _segment_ok(keys, left: int, right: int, deviation, tolerance: float) -> bool:
    """True when every interior key is within tolerance of interpolating
    straight from keys[left] to keys[right]."""
    span = keys[right].time - keys[left].time
    for j in range(left + 1, right):
        u = (keys[j].time - keys[left].time) / span if span > 0 else 0.0
        if deviation(keys[left], keys[right], u, keys[j]) > tolerance:
            return False
    return True


def _greedy_reduce(keys, deviation, tolerance: float) -> list:
    """Single forward pass: extend each segment as far as its interior
    keys stay within tolerance of the interpolation between the segment's
    endpoints, then anchor a survivor. Dropped keys are therefore always
    within tolerance of their final surviving neighbors."""
    n = len(keys)
    if n <= 2:
        return list(keys)
    kept = [0]
    left = 0
    right = left + 2
    while right < n:
        if _segment_ok(keys, left, right, deviation, tolerance):
            right += 1
        else:
            left = right - 1
            kept.append(left)
            right = left + 2
    kept.append(n - 1)
    return [keys[i] for i in kept]


def _rotation_deviation(a, b, u: float, actual) -> float:
    return geodesic_angle(slerp(a.rotation, b.rotation, u), actual.rotation)


def _translation_deviation(a, b, u: float, actual) -> float:
    return (lerp_vec3(a.translation, b.translation, u) - actual.translation).norm()


def _compress_rotation(track: RotationTrack, tolerance: float) -> RotationTrack:
    return RotationTrack(
        track.joint_name,
        tuple(_greedy_reduce(track.keys, _rotation_deviation, tolerance)),
    )


def _compress_translation(
    keys: tuple[TranslationKey, ...], tolerance: float
) -> tuple[TranslationKey, ...]:
    return tuple(_greedy_reduce(keys, _translation_deviation, tolerance))


def compress(c: Clip, tolerance: float) -> Clip:
    """Greedy single-pass keyframe reduction. An interior key is dropped
    when interpolating between its surviving left neighbor and the next
    original key reproduces it within tolerance (geodesic radians for
    rotations, Euclidean scene units for translations). First and last
    keys always survive."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    return replace(
        c,
        rotation_tracks=tuple(_compress_rotation(t, tolerance) for t in c.rotation_tracks),
        root_motion=_compress_translation(c.root_motion, tolerance),
        extra_translation_tracks=tuple(
            TranslationTrack(t.joint_name, _compress_translation(t.keys, tolerance))
            for t in c.extra_translation_tracks
        ),
    )


def estimate_tokens(text: str) -> int:
    """Heuristic LLM token count: ceil(len/4). Good enough for budgeting;
    not a real tokenizer."""
    return (len(text) + 3) // 4
