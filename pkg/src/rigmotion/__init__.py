"""rigmotion: natural-language animation for rigged models.

Library surface: a joint-hierarchy and keyframe-clip data model, the
grammar-v1 animation-string codec with keyframe compression, quaternion
sampling and forward kinematics, metaprompt assembly plus an LLM
validate-and-repair loop, a prompt-programmable animation state machine,
and an HTTP service. See README.md for the tour.
"""

from .animstring import (
    AnimDocument,
    AnimSyntaxError,
    ArityError,
    EmptyDocument,
    QuantizeSpec,
    compress,
    estimate_tokens,
    parse_animstring,
    quantize_clip,
    serialize_animstring,
    to_clip,
)
from .clip import (
    Clip,
    RotationKey,
    RotationTrack,
    TranslationKey,
    ValidationReport,
    clip_from_json,
    clip_to_json,
    normalize,
    validate_against,
)
from .control import (
    ControllerProgram,
    SimTrace,
    generate_controller,
    parse_controller,
    simulate,
)
from .errors import RigmotionError
from .geometry import Quaternion, Vec3, geodesic_angle, slerp
from .kinematics import (
    forward_kinematics,
    sample,
    sample_series,
    series_to_csv,
)
from .llm_bridge import (
    GenerationResult,
    HttpTransport,
    LlmConfig,
    NoValidAnimation,
    ReplayTransport,
    extract_candidate,
    generate_animation,
)
from .promptkit import (
    Demonstration,
    MetapromptSpec,
    build_metaprompt,
    check_budget,
)
from .skeleton import (
    Joint,
    Skeleton,
    joint_names,
    parse_object_json,
    serialize_object_json,
)

__version__ = "0.1.0"

__all__ = [
    "AnimDocument",
    "AnimSyntaxError",
    "ArityError",
    "Clip",
    "ControllerProgram",
    "Demonstration",
    "EmptyDocument",
    "GenerationResult",
    "HttpTransport",
    "Joint",
    "LlmConfig",
    "MetapromptSpec",
    "NoValidAnimation",
    "Quaternion",
    "QuantizeSpec",
    "ReplayTransport",
    "RigmotionError",
    "RotationKey",
    "RotationTrack",
    "SimTrace",
    "Skeleton",
    "TranslationKey",
    "ValidationReport",
    "Vec3",
    "build_metaprompt",
    "check_budget",
    "clip_from_json",
    "clip_to_json",
    "compress",
    "estimate_tokens",
    "extract_candidate",
    "forward_kinematics",
    "generate_animation",
    "generate_controller",
    "geodesic_angle",
    "joint_names",
    "normalize",
    "parse_animstring",
    "parse_controller",
    "parse_object_json",
    "quantize_clip",
    "sample",
    "sample_series",
    "serialize_animstring",
    "serialize_object_json",
    "series_to_csv",
    "simulate",
    "slerp",
    "to_clip",
    "validate_against",
]
