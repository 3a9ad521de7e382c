"""Command-line entry point (``rigmotion``).

Every subcommand works on files or stdin/stdout so the pipeline is shell
composable. Exit codes: 0 success, 1 usage or parse/validation failure,
2 generation failure, 3 I/O failure. Settings resolve flag > environment
> config file > built-in default; the API key is only ever read from
RIGMOTION_API_KEY.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import control as ctrl
from .animstring import (
    compress,
    estimate_tokens,
    parse_animstring,
    serialize_animstring,
    serialize_document,
    to_clip,
)
from .clip import clip_to_json, validate_against
from .errors import RigmotionError
from .kinematics import CLAMP, LOOP, sample_series, series_to_csv
from .llm_bridge import (
    HttpTransport,
    LlmConfig,
    NoValidAnimation,
    ReplayTransport,
    TransportError,
)
from .numfmt import ARCHIVAL, DECIMAL_PLACES, SIGNIFICANT_FIGURES, QuantizeSpec
from .promptkit import Demonstration, MetapromptSpec, build_metaprompt
from .skeleton import parse_object_json

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_GENERATION = 2
EXIT_IO = 3

ENV_PREFIX = "RIGMOTION_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are exit code 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _read_input(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _IoFailure(f"cannot read {path}: {e}") from e


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise _IoFailure(f"cannot write {path}: {e}") from e


class _IoFailure(Exception):
    pass


def _load_config_file(args) -> dict:
    path = args.config or os.environ.get(ENV_PREFIX + "CONFIG")
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise _IoFailure(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise RigmotionError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise RigmotionError(f"config file {path} must hold a JSON object")
    return data


def _setting(args, file_cfg: dict, name: str, default):
    """flag > env > config file > default."""
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return env
    if name in file_cfg:
        return file_cfg[name]
    return default


def _llm_config(args, file_cfg: dict) -> LlmConfig:
    return LlmConfig(
        endpoint_url=str(_setting(args, file_cfg, "endpoint", "")),
        model_id=str(_setting(args, file_cfg, "model", "gpt-4")),
        temperature=float(_setting(args, file_cfg, "temperature", 0.7)),
        max_retries=int(_setting(args, file_cfg, "max_retries", 2)),
        timeout=float(_setting(args, file_cfg, "timeout", 60.0)),
    )


def _quantize_spec(args, default: QuantizeSpec = ARCHIVAL) -> QuantizeSpec:
    if getattr(args, "sig_figs", None) is not None:
        return QuantizeSpec(SIGNIFICANT_FIGURES, args.sig_figs)
    if getattr(args, "decimal_places", None) is not None:
        return QuantizeSpec(DECIMAL_PLACES, args.decimal_places)
    return default


def _transport(args, file_cfg: dict):
    mock = _setting(args, file_cfg, "mock", None)
    if mock:
        return ReplayTransport.from_dir(mock)
    return HttpTransport()


def _build_spec(args, file_cfg: dict) -> tuple[MetapromptSpec, "object"]:
    object_json = _read_input(args.object)
    skeleton = parse_object_json(object_json)
    demos = []
    for item in args.demo or []:
        if "=" not in item:
            raise RigmotionError(f"--demo wants NAME=FILE, got {item!r}")
        name, _, path = item.partition("=")
        demos.append(Demonstration(name, _read_input(path)))
    spec = MetapromptSpec(
        template_id=args.mode,
        object_name=args.object_name or skeleton.object_name,
        object_json=object_json,
        demonstrations=tuple(demos),
        user_request=args.request,
    )
    return spec, skeleton


# --- subcommand handlers ------------------------------------------------------


def cmd_validate(args, file_cfg):
    clip = to_clip(parse_animstring(_read_input(args.anim)))
    skeleton = parse_object_json(_read_input(args.skeleton))
    report = validate_against(clip, skeleton)
    _write_output(report.summary() + "\n", args.out)
    return EXIT_OK if report.is_valid else EXIT_PARSE


def cmd_fmt(args, file_cfg):
    doc = parse_animstring(_read_input(args.anim))
    _write_output(serialize_document(doc, _quantize_spec(args)), args.out)
    return EXIT_OK


def cmd_compress(args, file_cfg):
    spec = _quantize_spec(args)
    clip = to_clip(parse_animstring(_read_input(args.anim)))
    before_keys = clip.key_count()
    before_tokens = estimate_tokens(serialize_animstring(clip, spec))
    squeezed = compress(clip, args.tolerance)
    text = serialize_animstring(squeezed, spec)
    after_tokens = estimate_tokens(text)
    print(
        f"keys: {before_keys} -> {squeezed.key_count()}; "
        f"tokens (est.): {before_tokens} -> {after_tokens}",
        file=sys.stderr,
    )
    _write_output(text, args.out)
    return EXIT_OK


def cmd_sample(args, file_cfg):
    clip = to_clip(parse_animstring(_read_input(args.anim)))
    skeleton = parse_object_json(_read_input(args.skeleton))
    series = sample_series(clip, skeleton, args.fps, args.edge)
    _write_output(series_to_csv(series, skeleton), args.out)
    return EXIT_OK


def cmd_prompt_build(args, file_cfg):
    spec, _ = _build_spec(args, file_cfg)
    template_dir = _setting(args, file_cfg, "template_dir", None)
    _write_output(build_metaprompt(spec, template_dir), args.out)
    return EXIT_OK


def cmd_generate(args, file_cfg):
    from .llm_bridge import generate_animation

    spec, skeleton = _build_spec(args, file_cfg)
    template_dir = _setting(args, file_cfg, "template_dir", None)
    cfg = _llm_config(args, file_cfg)
    transport = _transport(args, file_cfg)
    try:
        result = generate_animation(spec, skeleton, cfg, transport, template_dir)
    except (NoValidAnimation, TransportError) as e:
        print(f"generation failed: {e}", file=sys.stderr)
        return EXIT_GENERATION
    for note in result.repair_notes:
        print(f"repair: {note}", file=sys.stderr)
    _write_output(clip_to_json(result.clip), args.out)
    return EXIT_OK


def cmd_control_simulate(args, file_cfg):
    program = ctrl.parse_controller(_read_input(args.controller))
    inputs: list[tuple[float, str]] = []
    if args.inputs:
        raw = json.loads(_read_input(args.inputs))
        inputs = [(float(t), str(k)) for t, k in raw]
    trace = ctrl.simulate(program, inputs, args.horizon, args.seed)
    _write_output(ctrl.trace_to_json(trace), args.out)
    return EXIT_OK


def cmd_control_generate(args, file_cfg):
    template_dir = _setting(args, file_cfg, "template_dir", None)
    cfg = _llm_config(args, file_cfg)
    transport = _transport(args, file_cfg)
    try:
        program = ctrl.generate_controller(
            args.request, args.clips, cfg, transport, template_dir
        )
    except (ctrl.NoValidController, TransportError) as e:
        print(f"generation failed: {e}", file=sys.stderr)
        return EXIT_GENERATION
    _write_output(ctrl.serialize_controller(program), args.out)
    return EXIT_OK


def cmd_serve(args, file_cfg):
    from .llm_bridge import API_KEY_ENV
    from .promptkit import ZERO_SHOT  # noqa: F401  (mode names documented in --help)
    from .service import ServiceConfig, run_server

    store_dir = str(_setting(args, file_cfg, "store_dir", "./rigmotion-store"))
    template_dir = _setting(args, file_cfg, "template_dir", None)
    config = ServiceConfig(
        store_dir=store_dir,
        llm=_llm_config(args, file_cfg),
        template_dir=template_dir,
        cors_origins=tuple((args.cors_origin or "*").split(",")),
        default_demonstration=_default_demo(),
    )
    transport = _transport(args, file_cfg)
    run_server(config, transport, host=args.host, port=args.port)
    return EXIT_OK


def _default_demo() -> Demonstration | None:
    """Packaged whale swim string used for zero-shot format guidance when a
    request carries no demonstration of its own."""
    from .fixtures import WHALE_SWIM_DESCRIPTION, whale_swim_animstring

    return Demonstration(WHALE_SWIM_DESCRIPTION, whale_swim_animstring())


# --- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="rigmotion", description=__doc__)
    parser.add_argument("--config", help="JSON config file (or RIGMOTION_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("validate", help="check an animation string against a skeleton")
    p.add_argument("anim", nargs="?", help="animation string file ('-' or omit for stdin)")
    p.add_argument("--skeleton", required=True, help="object JSON file")
    add_out(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fmt", help="canonical re-serialization of an animation string")
    p.add_argument("anim", nargs="?")
    p.add_argument("--sig-figs", type=int)
    p.add_argument("--decimal-places", type=int)
    add_out(p)
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("compress", help="keyframe reduction plus quantization")
    p.add_argument("anim", nargs="?")
    p.add_argument("--tolerance", type=float, required=True, help="radians / scene units")
    p.add_argument("--sig-figs", type=int)
    p.add_argument("--decimal-places", type=int)
    add_out(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("sample", help="world-pose CSV via forward kinematics")
    p.add_argument("anim", nargs="?")
    p.add_argument("--skeleton", required=True)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--edge", choices=[CLAMP, LOOP], default=CLAMP)
    add_out(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("prompt", help="metaprompt utilities")
    prompt_sub = p.add_subparsers(dest="prompt_command", required=True)
    pb = prompt_sub.add_parser("build", help="assemble the metaprompt text")
    _add_prompt_flags(pb)
    add_out(pb)
    pb.set_defaults(func=cmd_prompt_build)

    p = sub.add_parser("generate", help="LLM animation generation with validate/repair")
    _add_prompt_flags(p)
    _add_llm_flags(p)
    add_out(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("control", help="animation state machine commands")
    control_sub = p.add_subparsers(dest="control_command", required=True)
    cs = control_sub.add_parser("simulate", help="deterministic trace for a controller")
    cs.add_argument("controller", nargs="?", help="controller DSL file")
    cs.add_argument("--inputs", help="JSON file of [time, key] pairs")
    cs.add_argument("--horizon", type=float, default=10.0)
    cs.add_argument("--seed", type=int, default=0)
    add_out(cs)
    cs.set_defaults(func=cmd_control_simulate)
    cg = control_sub.add_parser("generate", help="LLM controller generation")
    cg.add_argument("--request", required=True)
    cg.add_argument("--clips", nargs="+", required=True, help="available clip names")
    _add_llm_flags(cg)
    add_out(cg)
    cg.set_defaults(func=cmd_control_generate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7878)
    p.add_argument("--store", dest="store_dir", help="store directory")
    p.add_argument("--cors-origin", help="comma-separated allowed origins (default *)")
    _add_llm_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def _add_prompt_flags(p) -> None:
    p.add_argument("--mode", choices=["few_shot", "zero_shot"], required=True)
    p.add_argument("--object", required=True, help="object JSON file")
    p.add_argument("--object-name", help="display name (default: root joint name)")
    p.add_argument(
        "--demo",
        action="append",
        metavar="NAME=FILE",
        help="demonstration description and animation string file; repeatable",
    )
    p.add_argument("--request", required=True, help="natural-language animation request")
    p.add_argument("--template-dir", dest="template_dir")


def _add_llm_flags(p) -> None:
    p.add_argument("--endpoint", help="chat-completions URL")
    p.add_argument("--model", help="model id")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-retries", dest="max_retries", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--mock", help="directory of numbered replay responses (offline)")
    if not any(a.dest == "template_dir" for a in p._actions):
        p.add_argument("--template-dir", dest="template_dir")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        file_cfg = _load_config_file(args)
        return args.func(args, file_cfg)
    except _IoFailure as e:
        print(f"rigmotion: {e}", file=sys.stderr)
        return EXIT_IO
    except RigmotionError as e:
        print(f"rigmotion: {e}", file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as e:
        print(f"rigmotion: invalid JSON input: {e}", file=sys.stderr)
        return EXIT_PARSE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
