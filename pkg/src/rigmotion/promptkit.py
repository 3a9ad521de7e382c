"""Metaprompt assembly for few-shot and zero-shot animation generation.

Templates are plain-text assets (packaged under ``rigmotion/templates``,
overridable via a template directory) with ``{OBJECT_NAME}``,
``{OBJECT_JSON}``, ``{ANIMATION_NAME}``, ``{ANIMATION_STRING}``,
``{USER_REQUEST}`` placeholders; ``{DEMONSTRATIONS}`` splices the
rendered demonstration blocks into the main template. Substitution is
pure text replacement, so identical specs build byte-identical prompts.

The wording is this project's own reconstruction; results with live
models may differ from published figures.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .animstring import AnimSyntaxError, ArityError, EmptyDocument, estimate_tokens, parse_animstring
from .errors import RigmotionError
from .skeleton import (
    DegenerateRotation,
    DuplicateJointName,
    MalformedJson,
    NotATree,
    parse_object_json,
)

FEW_SHOT = "few_shot"
ZERO_SHOT = "zero_shot"

_PLACEHOLDER_NAMES = (
    "OBJECT_NAME",
    "OBJECT_JSON",
    "ANIMATION_NAME",
    "ANIMATION_STRING",
    "USER_REQUEST",
    "DEMONSTRATIONS",
    "CLIP_LIST",
)


class PromptError(RigmotionError):
    pass


class UnparsableDemonstration(PromptError):
    pass


class UnparsableObjectJson(PromptError):
    pass


class MissingDemonstration(PromptError):
    pass


class TooManyDemonstrations(PromptError):
    pass


@dataclass(frozen=True)
class Demonstration:
    animation_name: str  # natural-language description
    animation_string: str  # grammar v1 text


@dataclass(frozen=True)
class MetapromptSpec:
    template_id: str  # FEW_SHOT or ZERO_SHOT
    object_name: str
    object_json: str
    demonstrations: tuple[Demonstration, ...]
    user_request: str


@dataclass(frozen=True)
class BudgetReport:
    estimated_tokens: int
    limit_tokens: int
    over: bool
    remediation: tuple[str, ...]


def load_template(name: str, template_dir: str | Path | None = None) -> str:
    """Template text by name ('few_shot', 'zero_shot', 'demonstration',
    'controller'). A file ``<name>.txt`` in template_dir wins over the
    packaged asset."""
    if template_dir is not None:
        candidate = Path(template_dir) / f"{name}.txt"
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    packaged = resources.files("rigmotion").joinpath(f"templates/{name}.txt")
    try:
        return packaged.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise PromptError(f"no template named {name!r}") from None


def _validate(spec: MetapromptSpec) -> None:
    if spec.template_id not in (FEW_SHOT, ZERO_SHOT):
        raise PromptError(f"unknown template_id: {spec.template_id!r}")
    try:
        parse_object_json(spec.object_json)
    except (MalformedJson, DuplicateJointName, NotATree, DegenerateRotation) as e:
        raise UnparsableObjectJson(str(e)) from e
    if not spec.demonstrations:
        raise MissingDemonstration(f"{spec.template_id} needs at least one demonstration")
    if spec.template_id == ZERO_SHOT and len(spec.demonstrations) != 1:
        raise TooManyDemonstrations(
            "zero_shot uses exactly one cross-object format demonstration, "
            f"got {len(spec.demonstrations)}"
        )
    for demo in spec.demonstrations:
        try:
            parse_animstring(demo.animation_string)
        except (AnimSyntaxError, ArityError, EmptyDocument) as e:
            raise UnparsableDemonstration(
                f"demonstration {demo.animation_name!r}: {e}"
            ) from e


def build_metaprompt(spec: MetapromptSpec, template_dir: str | Path | None = None) -> str:
    """The full LLM conditioning text. Deterministic; no placeholder
    tokens survive in the output."""
    _validate(spec)
    template = load_template(spec.template_id, template_dir)
    demo_template = load_template("demonstration", template_dir)
    blocks = []
    for demo in spec.demonstrations:
        block = demo_template.replace("{ANIMATION_NAME}", demo.animation_name)
        block = block.replace("{ANIMATION_STRING}", demo.animation_string.rstrip("\n"))
        blocks.append(block.rstrip("\n"))
    text = template.replace("{DEMONSTRATIONS}", "\n\n".join(blocks) + "\n")
    text = text.replace("{OBJECT_NAME}", spec.object_name)
    text = text.replace("{OBJECT_JSON}", spec.object_json.rstrip("\n"))
    text = text.replace("{USER_REQUEST}", spec.user_request)
    for name in _PLACEHOLDER_NAMES:
        token = "{" + name + "}"
        if token in text:
            raise PromptError(f"template left {token} unsubstituted")
    return text


def build_controller_prompt(
    request: str, available_clips: list[str], template_dir: str | Path | None = None
) -> str:
    if not available_clips:
        raise PromptError("available_clips must not be empty")
    template = load_template("controller", template_dir)
    clip_list = ", ".join(f'"{c}"' for c in available_clips)
    text = template.replace("{CLIP_LIST}", clip_list)
    text = text.replace("{USER_REQUEST}", request)
    for name in _PLACEHOLDER_NAMES:
        token = "{" + name + "}"
        if token in text:
            raise PromptError(f"template left {token} unsubstituted")
    return text


#: Remediation steps when a prompt exceeds its token budget, in order.
BUDGET_REMEDIATION = (
    "raise the keyframe compression tolerance",
    "coarsen the quantization (fewer significant figures or decimal places)",
    "drop demonstrations, last first",
)


def check_budget(prompt: str, limit_tokens: int) -> BudgetReport:
    if limit_tokens <= 0:
        raise ValueError("limit_tokens must be > 0")
    estimate = estimate_tokens(prompt)
    return BudgetReport(
        estimated_tokens=estimate,
        limit_tokens=limit_tokens,
        over=estimate > limit_tokens,
        remediation=BUDGET_REMEDIATION,
    )
