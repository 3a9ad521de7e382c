"""Prompt-programmable animation state machine.

Instead of compiling and executing generated engine scripts, the LLM
targets a closed declarative DSL (see docs/controller-dsl.md) whose
surface mirrors the usual animation-manager helpers: states bound to
clips, an initial state, and trigger-driven crossfade transitions. The
simulator is a discrete-event interpreter with a SplitMix64-seeded RNG,
so a (program, inputs, seed) triple always yields a byte-identical trace.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import RigmotionError
from .numfmt import canonical_number
from .promptkit import build_controller_prompt

ANY = "ANY"

KEY = "key"
TIMER = "timer"
RANDOM = "random"

ENTERED = "entered"
CROSSFADE_STARTED = "crossfade_started"
INPUT = "input"


class ControllerError(RigmotionError):
    pass


class ControllerSyntaxError(ControllerError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownState(ControllerError):
    def __init__(self, name: str, line: int = 0):
        super().__init__(f"transition references undeclared state {name!r}")
        self.name = name


class DuplicateState(ControllerError):
    def __init__(self, name: str):
        super().__init__(f"state {name!r} declared twice")
        self.name = name


class NoInitialState(ControllerError):
    def __init__(self):
        super().__init__("program declares no initial state")


class NoValidController(RigmotionError):
    def __init__(self, attempts: int, last_errors: list[str]):
        super().__init__(
            f"no valid controller after {attempts} attempt(s); last errors: "
            + "; ".join(last_errors)
        )
        self.attempts = attempts
        self.last_errors = last_errors


@dataclass(frozen=True)
class Trigger:
    kind: str  # KEY | TIMER | RANDOM
    key: str | None = None
    seconds: float | None = None  # timer duration
    probability: float | None = None  # random: chance per check
    interval: float | None = None  # random: seconds between checks


@dataclass(frozen=True)
class Transition:
    source: str  # state name or ANY
    target: str
    trigger: Trigger
    fade: float


@dataclass(frozen=True)
class StateDecl:
    name: str
    clip_name: str
    loop: bool


@dataclass(frozen=True)
class ControllerProgram:
    states: tuple[StateDecl, ...]
    initial_state: str
    transitions: tuple[Transition, ...]

    def state_names(self) -> list[str]:
        return [s.name for s in self.states]

    def clip_names(self) -> list[str]:
        return [s.clip_name for s in self.states]


_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")

_STATE_RE = re.compile(
    r'^state\s+(?P<id>[A-Za-z_][\w\-]*)\s+plays\s+"(?P<clip>[^"]+)"(?P<loop>\s+loop)?\s*$'
)
_INITIAL_RE = re.compile(r"^initial\s+(?P<id>[A-Za-z_][\w\-]*)\s*$")
_TRANSITION_RE = re.compile(
    r"^on\s+(?P<trigger>\w+)\s*\((?P<args>[^)]*)\)\s+"
    r"(?:from|in)\s+(?P<source>[A-Za-z_][\w\-]*|ANY)\s+"
    r"goto\s+(?P<target>[A-Za-z_][\w\-]*)\s+"
    r"fade\s+(?P<fade>[^\s]+)\s*$"
)


def _parse_number(text: str, lineno: int, what: str) -> float:
    if not _NUM_RE.fullmatch(text):
        raise ControllerSyntaxError(lineno, f"{what} must be a number, got {text!r}")
    return float(text)


def _parse_trigger(kind: str, args: str, lineno: int) -> Trigger:
    parts = [a.strip() for a in args.split(",")] if args.strip() else []
    if kind == KEY:
        if len(parts) != 1 or not parts[0]:
            raise ControllerSyntaxError(lineno, "key(...) takes one key name")
        return Trigger(KEY, key=parts[0])
    if kind == TIMER:
        if len(parts) != 1:
            raise ControllerSyntaxError(lineno, "timer(...) takes one duration in seconds")
        seconds = _parse_number(parts[0], lineno, "timer duration")
        if seconds <= 0:
            raise ControllerSyntaxError(lineno, "timer duration must be > 0")
        return Trigger(TIMER, seconds=seconds)
    if kind == RANDOM:
        if len(parts) != 2:
            raise ControllerSyntaxError(lineno, "random(...) takes probability and check interval")
        probability = _parse_number(parts[0], lineno, "probability")
        interval = _parse_number(parts[1], lineno, "check interval")
        if not 0.0 <= probability <= 1.0:
            raise ControllerSyntaxError(lineno, "probability must be in [0, 1]")
        if interval <= 0:
            raise ControllerSyntaxError(lineno, "check interval must be > 0")
        return Trigger(RANDOM, probability=probability, interval=interval)
    raise ControllerSyntaxError(lineno, f"unknown trigger {kind!r} (key, timer or random)")


def parse_controller(text: str) -> ControllerProgram:
    """Parse controller DSL v1. Blank lines, ``#`` comments and markdown
    fences are ignored."""
    states: list[StateDecl] = []
    names: set[str] = set()
    initial: str | None = None
    raw_transitions: list[tuple[Transition, int]] = []

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("```"):
            continue
        m = _STATE_RE.match(line)
        if m:
            name = m.group("id")
            if name in names:
                raise DuplicateState(name)
            names.add(name)
            states.append(StateDecl(name, m.group("clip"), bool(m.group("loop"))))
            continue
        m = _INITIAL_RE.match(line)
        if m:
            initial = m.group("id")
            continue
        m = _TRANSITION_RE.match(line)
        if m:
            trigger = _parse_trigger(m.group("trigger"), m.group("args"), lineno)
            fade = _parse_number(m.group("fade"), lineno, "fade")
            if fade < 0:
                raise ControllerSyntaxError(lineno, "fade must be >= 0")
            raw_transitions.append(
                (Transition(m.group("source"), m.group("target"), trigger, fade), lineno)
            )
            continue
        keyword = line.split()[0]
        raise ControllerSyntaxError(
            lineno,
            f"cannot parse line starting with {keyword!r} "
            "(expected state/initial/on declaration)",
        )

    if initial is None:
        raise NoInitialState()
    if initial not in names:
        raise UnknownState(initial)
    for transition, lineno in raw_transitions:
        if transition.source != ANY and transition.source not in names:
            raise UnknownState(transition.source, lineno)
        if transition.target not in names:
            raise UnknownState(transition.target, lineno)

    return ControllerProgram(
        states=tuple(states),
        initial_state=initial,
        transitions=tuple(t for t, _ in raw_transitions),
    )


def serialize_controller(p: ControllerProgram) -> str:
    """Canonical DSL text for a parsed program."""
    lines = []
    for s in p.states:
        suffix = " loop" if s.loop else ""
        lines.append(f'state {s.name} plays "{s.clip_name}"{suffix}')
    lines.append(f"initial {p.initial_state}")
    for t in p.transitions:
        if t.trigger.kind == KEY:
            trig = f"key({t.trigger.key})"
        elif t.trigger.kind == TIMER:
            trig = f"timer({canonical_number(t.trigger.seconds)})"
        else:
            trig = (
                f"random({canonical_number(t.trigger.probability)}, "
                f"{canonical_number(t.trigger.interval)})"
            )
        lines.append(f"on {trig} from {t.source} goto {t.target} fade {canonical_number(t.fade)}")
    return "\n".join(lines) + "\n"


# --- deterministic RNG -------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 sequence; documented so traces reproduce across
    implementations. next_float() yields the top 53 bits scaled to [0, 1)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


# --- simulation --------------------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    time: float
    kind: str  # ENTERED | CROSSFADE_STARTED | INPUT
    state: str | None = None
    source: str | None = None
    target: str | None = None
    fade: float | None = None
    key: str | None = None


@dataclass(frozen=True)
class SimTrace:
    events: tuple[TraceEvent, ...]
    horizon: float
    seed: int


# Tie-break priorities at equal times: key presses land first, then
# timers, then random checks; declaration order settles the rest.
_PRIO_INPUT = 0
_PRIO_TIMER = 1
_PRIO_RANDOM = 2


def simulate(
    p: ControllerProgram,
    inputs: list[tuple[float, str]],
    horizon: float,
    rng_seed: int,
) -> SimTrace:
    """Discrete-event run of the state machine over [0, horizon].

    Key presses fire the first declared matching transition from the
    current state (ANY matches every state); timers fire at state entry
    plus their duration; random triggers draw once per check interval,
    with check clocks re-armed on every state entry. The machine switches
    state at crossfade start. Unmatched inputs are recorded and ignored.
    Simultaneous events resolve input < timer < random, then declaration
    order, so a fixed (program, inputs, seed) triple is fully
    deterministic.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    for t, _ in inputs:
        if t < 0 or t > horizon:
            raise ValueError(f"input at t={t} outside [0, horizon]")
    if sorted(t for t, _ in inputs) != [t for t, _ in inputs]:
        raise ValueError("input times must be sorted")

    rng = SplitMix64(rng_seed)
    events: list[TraceEvent] = [TraceEvent(0.0, ENTERED, state=p.initial_state)]
    current = p.initial_state
    entry_time = 0.0
    input_idx = 0

    def active(kind: str) -> list[tuple[int, Transition]]:
        return [
            (i, t)
            for i, t in enumerate(p.transitions)
            if t.trigger.kind == kind and t.source in (current, ANY)
        ]

    def arm_randoms() -> dict[int, float]:
        return {i: entry_time + t.trigger.interval for i, t in active(RANDOM)}

    def enter(target: str, fade: float, now: float) -> None:
        nonlocal current, entry_time
        events.append(
            TraceEvent(now, CROSSFADE_STARTED, source=current, target=target, fade=fade)
        )
        events.append(TraceEvent(now, ENTERED, state=target))
        current = target
        entry_time = now

    next_random_check = arm_randoms()

    while True:
        candidates: list[tuple[float, int, int]] = []
        if input_idx < len(inputs):
            candidates.append((inputs[input_idx][0], _PRIO_INPUT, -1))
        for i, t in active(TIMER):
            candidates.append((entry_time + t.trigger.seconds, _PRIO_TIMER, i))
        for i, check_time in next_random_check.items():
            candidates.append((check_time, _PRIO_RANDOM, i))
        candidates = [c for c in candidates if c[0] <= horizon]
        if not candidates:
            break
        candidates.sort()
        when, prio, idx = candidates[0]

        if prio == _PRIO_INPUT:
            when, key = inputs[input_idx]
            input_idx += 1
            events.append(TraceEvent(when, INPUT, key=key))
            for _, t in active(KEY):
                if t.trigger.key == key:
                    enter(t.target, t.fade, when)
                    next_random_check = arm_randoms()
                    break
        elif prio == _PRIO_TIMER:
            t = p.transitions[idx]
            enter(t.target, t.fade, when)
            next_random_check = arm_randoms()
        else:
            t = p.transitions[idx]
            if rng.next_float() < t.trigger.probability:
                enter(t.target, t.fade, when)
                next_random_check = arm_randoms()
            else:
                next_random_check[idx] = when + t.trigger.interval

    return SimTrace(events=tuple(events), horizon=horizon, seed=rng_seed)


def state_occupancy(trace: SimTrace) -> dict[str, float]:
    """Fraction of the horizon spent in each state (state switches count
    from crossfade start)."""
    spans: dict[str, float] = {}
    current: str | None = None
    since = 0.0
    for e in trace.events:
        if e.kind != ENTERED:
            continue
        if current is not None:
            spans[current] = spans.get(current, 0.0) + (e.time - since)
        current = e.state
        since = e.time
    if current is not None:
        spans[current] = spans.get(current, 0.0) + (trace.horizon - since)
    total = trace.horizon if trace.horizon > 0 else 1.0
    return {s: dt / total for s, dt in spans.items()}


# --- trace JSON --------------------------------------------------------------


def _event_json(e: TraceEvent) -> str:
    t = canonical_number(e.time)
    if e.kind == ENTERED:
        return f'{{"t": {t}, "event": "entered", "state": {json.dumps(e.state)}}}'
    if e.kind == CROSSFADE_STARTED:
        return (
            f'{{"t": {t}, "event": "crossfade_started", "from": {json.dumps(e.source)}, '
            f'"to": {json.dumps(e.target)}, "fade": {canonical_number(e.fade)}}}'
        )
    return f'{{"t": {t}, "event": "input", "key": {json.dumps(e.key)}}}'


def trace_to_json(trace: SimTrace) -> str:
    """Canonical SimTrace JSON; byte-stable for golden files."""
    lines = ["{"]
    lines.append(f'  "horizon": {canonical_number(trace.horizon)},')
    lines.append(f'  "seed": {trace.seed},')
    if trace.events:
        lines.append('  "events": [')
        for i, e in enumerate(trace.events):
            comma = "," if i < len(trace.events) - 1 else ""
            lines.append(f"    {_event_json(e)}{comma}")
        lines.append("  ]")
    else:
        lines.append('  "events": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def generate_controller(
    request: str,
    available_clips: list[str],
    cfg,
    transport,
    template_dir: str | Path | None = None,
) -> ControllerProgram:
    """LLM-backed controller generation with the same validate-and-repair
    loop as animation generation. The returned program references only
    clips from available_clips."""
    from .llm_bridge import strip_fences

    if not available_clips:
        raise ValueError("available_clips must not be empty")
    prompt = build_controller_prompt(request, available_clips, template_dir)
    messages: list[dict] = [{"role": "user", "content": prompt}]
    errors: list[str] = []
    attempts = 0
    allowed = set(available_clips)
    while attempts <= cfg.max_retries:
        attempts += 1
        response = transport.complete(messages, cfg)
        candidate = strip_fences(response).strip()
        try:
            program = parse_controller(candidate)
        except ControllerError as e:
            errors = [f"{type(e).__name__}: {e}"]
        else:
            unknown = [c for c in program.clip_names() if c not in allowed]
            if not unknown:
                return program
            errors = [
                f"UnknownClip: state plays {c!r} which is not an available clip"
                for c in unknown
            ]
        note = "; ".join(errors)
        messages.append({"role": "assistant", "content": response})
        messages.append(
            {
                "role": "user",
                "content": f"The controller program is invalid: {note}\n"
                "Output only the corrected program.",
            }
        )
    raise NoValidController(attempts, errors)
