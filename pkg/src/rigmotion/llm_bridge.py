"""Chat-completion transport and the validate-and-repair generation loop.

Transports are injected so the whole pipeline runs offline: HttpTransport
speaks the JSON chat-completions dialect, ReplayTransport plays back a
directory of numbered response files (or an in-memory script) and
performs no I/O beyond reading those files. A parse or validation
failure triggers a repair turn that feeds the error text back to the
model, up to ``max_retries`` extra attempts.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock
from typing import Protocol

from .animstring import AnimSyntaxError, ArityError, EmptyDocument, parse_animstring, to_clip
from .clip import Clip, validate_against
from .errors import RigmotionError
from .promptkit import MetapromptSpec, build_metaprompt
from .skeleton import DegenerateRotation, Skeleton

API_KEY_ENV = "RIGMOTION_API_KEY"


class TransportError(RigmotionError):
    pass


class AuthError(TransportError):
    pass


class NoValidAnimation(RigmotionError):
    def __init__(self, attempts: int, last_errors: list[str], repair_notes: list[str] | None = None):
        super().__init__(
            f"no valid animation after {attempts} attempt(s); last errors: "
            + "; ".join(last_errors)
        )
        self.attempts = attempts
        self.last_errors = last_errors
        self.repair_notes = repair_notes or []


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str = ""
    model_id: str = "gpt-4"
    temperature: float = 0.7  # untuned default
    max_retries: int = 2
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class GenerationResult:
    clip: Clip
    raw_response: str
    attempts: int
    repair_notes: list[str] = field(default_factory=list)


class Transport(Protocol):
    """One chat-completion round trip. Implementations must be safe for
    concurrent use."""

    def complete(self, messages: list[dict], cfg: LlmConfig) -> str: ...


class HttpTransport:
    """POSTs {model, messages, temperature} to a chat-completions endpoint.

    The API key comes from the RIGMOTION_API_KEY environment variable and
    is sent as a bearer token.
    """

    def __init__(self, api_key: str | None = None):
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")

    def complete(self, messages: list[dict], cfg: LlmConfig) -> str:
        import httpx

        if not cfg.endpoint_url:
            raise TransportError("no endpoint_url configured")
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {
            "model": cfg.model_id,
            "messages": messages,
            "temperature": cfg.temperature,
        }
        try:
            response = httpx.post(
                cfg.endpoint_url, json=payload, headers=headers, timeout=cfg.timeout
            )
        except httpx.HTTPError as e:
            raise TransportError(f"request failed: {e}") from e
        if response.status_code in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {response.status_code})")
        if response.status_code >= 400:
            raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise TransportError(f"malformed completion response: {e}") from e


class ReplayTransport:
    """Deterministic mock: returns scripted responses in order and raises
    TransportError when the script runs out."""

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._index = 0
        self._lock = Lock()

    @classmethod
    def from_dir(cls, directory: str | Path) -> "ReplayTransport":
        """Load numbered response files (001.txt, 002.txt, ...) sorted by
        name."""
        path = Path(directory)
        files = sorted(p for p in path.iterdir() if p.suffix == ".txt")
        if not files:
            raise TransportError(f"no .txt response files in {path}")
        return cls([p.read_text(encoding="utf-8") for p in files])

    def complete(self, messages: list[dict], cfg: LlmConfig) -> str:
        with self._lock:
            if self._index >= len(self._responses):
                raise TransportError(
                    f"replay script exhausted after {len(self._responses)} response(s)"
                )
            text = self._responses[self._index]
            self._index += 1
            return text


_WORD_ANIMATION = re.compile(r"\bANIMATION\b")
_WORD_END = re.compile(r"^[ \t]*END[ \t]*$", re.MULTILINE)


def strip_fences(text: str) -> str:
    return "\n".join(
        line for line in text.split("\n") if not line.lstrip().startswith("```")
    )


def extract_candidate(response_text: str) -> str:
    """The first grammar-v1 block in a response: from the first ANIMATION
    keyword through the first END line after it, fences removed. Falls
    back to the whole trimmed text so the parser can produce a real
    error."""
    text = strip_fences(response_text)
    start = _WORD_ANIMATION.search(text)
    if start:
        end = _WORD_END.search(text, start.end())
        if end:
            return text[start.start():end.end()].strip()
    return text.strip()


REPAIR_INSTRUCTION = "Output only the corrected animation string."


def _try_parse(candidate: str, skeleton: Skeleton) -> tuple[Clip | None, list[str]]:
    try:
        clip = to_clip(parse_animstring(candidate))
    except (AnimSyntaxError, ArityError, EmptyDocument, DegenerateRotation) as e:
        return None, [f"{type(e).__name__}: {e}"]
    report = validate_against(clip, skeleton)
    if report.is_valid:
        return clip, []
    return None, report.error_messages()


def generate_animation(
    spec: MetapromptSpec,
    skeleton: Skeleton,
    cfg: LlmConfig,
    transport: Transport,
    template_dir: str | Path | None = None,
) -> GenerationResult:
    """Prompt, parse, validate; on failure feed the errors back as a
    repair turn. Returns the first clip that validates cleanly against
    the target skeleton, or raises NoValidAnimation."""
    prompt = build_metaprompt(spec, template_dir)
    messages: list[dict] = [{"role": "user", "content": prompt}]
    repair_notes: list[str] = []
    errors: list[str] = []
    attempts = 0
    while attempts <= cfg.max_retries:
        attempts += 1
        response = transport.complete(messages, cfg)
        candidate = extract_candidate(response)
        clip, errors = _try_parse(candidate, skeleton)
        if clip is not None:
            return GenerationResult(
                clip=clip,
                raw_response=response,
                attempts=attempts,
                repair_notes=repair_notes,
            )
        note = "; ".join(errors)
        repair_notes.append(f"attempt {attempts}: {note}")
        messages.append({"role": "assistant", "content": response})
        messages.append(
            {
                "role": "user",
                "content": f"The animation string is invalid: {note}\n{REPAIR_INSTRUCTION}",
            }
        )
    raise NoValidAnimation(attempts, errors, repair_notes)
