"""Command-line entry point: generate, score, baseline, fixture, validate.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .core import RngKey
from .dataset import load_and_validate, load_for_scoring
from .errors import FragqaError
from .evalkit import random_baseline, render_baseline, render_report, score_run
from .ingest import FixtureSpec, synthesize_fixture, write_fixture, write_manifest
from .pipeline import PipelineConfig, generate_dataset
from .taskgen import DEFAULT_TEMPLATES, TASK_GROUPS, load_template_bank

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

_STRATEGIES = ("random", "uniform", "keyframe", "motion-salient")


def _parse_tasks(text: str) -> frozenset[str]:
    if text == "all":
        return frozenset(TASK_GROUPS)
    tasks = frozenset(part.strip() for part in text.split(",") if part.strip())
    unknown = tasks - set(TASK_GROUPS)
    if unknown:
        raise ValueError(f"unknown tasks {sorted(unknown)}; choose from {TASK_GROUPS}")
    return tasks


def _parse_speed_factors(text: str) -> dict[str, Fraction]:
    factors: dict[str, Fraction] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, value = part.partition("=")
        if not value:
            raise ValueError(f"speed factor {part!r} must look like name=value")
        factors[name.strip()] = Fraction(value.strip())
    return factors


def _add_generate_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("generate", help="build a task dataset from a video manifest")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sets", type=int, default=3)
    p.add_argument("--frames-min", type=int, default=3)
    p.add_argument("--frames-max", type=int, default=5)
    p.add_argument("--strategy", choices=_STRATEGIES, default="motion-salient")
    p.add_argument("--range-mode", choices=("any", "adjacent", "nonadjacent"), default="any")
    p.add_argument("--shuffle-prob", type=float, default=0.5)
    p.add_argument("--same-prob", type=float, default=0.5)
    p.add_argument("--tasks", default="all")
    p.add_argument("--strip-answers", action="store_true")
    p.add_argument("--speed-factors", default="")
    p.add_argument("--downscale", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--templates", type=Path, default=None,
                   help="extra question templates merged into the default bank")


def _cmd_generate(args: argparse.Namespace) -> int:
    templates = DEFAULT_TEMPLATES
    if args.templates is not None:
        templates = load_template_bank(args.templates)
    cfg = PipelineConfig(
        manifest=args.manifest,
        out_dir=args.out,
        dataset_seed=args.seed,
        n_sets=args.sets,
        m_min=args.frames_min,
        m_max=args.frames_max,
        strategy=args.strategy.replace("-", "_"),
        range_mode=args.range_mode,
        p_same=args.same_prob,
        p_shuffle=args.shuffle_prob,
        speed_factors=_parse_speed_factors(args.speed_factors) if args.speed_factors else {},
        tasks=_parse_tasks(args.tasks),
        strip_answers=args.strip_answers,
        downscale=args.downscale,
        workers=args.workers,
        templates=templates,
    )
    result = generate_dataset(cfg)
    print(
        f"generated {len(result.records)} records from "
        f"{result.videos_ok}/{result.videos_total} videos "
        f"({len(result.skips)} skips) -> {result.written['manifest'].parent}"
    )
    if result.videos_total and result.videos_ok == 0:
        print("error: every video failed; see the skip log", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _read_responses(path: Path) -> list[dict]:
    responses = []
    for line_num, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            responses.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise FragqaError(f"{path}:{line_num}: invalid JSON: {exc}") from exc
    return responses


def _write_or_print(text: str, out: Optional[Path]) -> None:
    if out is None:
        print(text, end="")
    else:
        out.write_text(text, encoding="utf-8")
        print(f"report written to {out}")


def _templates_for(args: argparse.Namespace) -> dict[str, tuple[str, ...]]:
    if getattr(args, "templates", None) is not None:
        return load_template_bank(args.templates)
    return DEFAULT_TEMPLATES


def _cmd_score(args: argparse.Namespace) -> int:
    records, _ = load_for_scoring(args.data, templates=_templates_for(args))
    responses = _read_responses(args.responses)
    report = score_run(records, responses)
    _write_or_print(render_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_baseline(args: argparse.Namespace) -> int:
    records, _ = load_for_scoring(args.data, templates=_templates_for(args))
    key = RngKey(args.seed, "", "evalkit.baseline", 0)
    baseline = random_baseline(records, args.trials, key)
    _write_or_print(render_baseline(baseline, args.format), args.out)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    records, manifest = load_and_validate(args.data, templates=_templates_for(args))
    print(f"ok: {len(records)} records, counts {manifest['counts']}")
    return EXIT_OK


def _cmd_fixture(args: argparse.Namespace) -> int:
    try:
        spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        seed = int(spec.get("seed", 0))
        videos = spec["videos"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FragqaError(f"cannot parse fixture spec {args.spec}: {exc}") from exc
    entries = []
    for video in videos:
        frame_count = int(video["frame_count"])
        motion = video.get("motion_schedule", 0)
        if isinstance(motion, int):  # shorthand: uniform mass per transition
            motion = [motion] * (frame_count - 1)
        marker = video.get("marker_schedule")
        fixture = FixtureSpec(
            video_id=str(video["video_id"]),
            frame_count=frame_count,
            width=int(video.get("width", 32)),
            height=int(video.get("height", 24)),
            marker_schedule=tuple(bool(v) for v in marker) if marker is not None else None,
            motion_schedule=tuple(int(v) for v in motion),
            target=str(video.get("target", "marker")),
        )
        seq, presence, _ = synthesize_fixture(
            fixture, RngKey(seed, fixture.video_id, "fixture", 0)
        )
        entries.append(
            write_fixture(seq, presence if fixture.marker_schedule else None, args.out)
        )
    manifest_path = write_manifest(entries, args.out)
    print(f"wrote {len(entries)} fixture videos -> {manifest_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fragqa",
        description="Deterministic fragment-level video QA generation and scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate_parser(sub)

    p = sub.add_parser("score", help="score a response file against a dataset")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--responses", required=True, type=Path)
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--templates", type=Path, default=None)

    p = sub.add_parser("baseline", help="random-responder baseline for a dataset")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--templates", type=Path, default=None)

    p = sub.add_parser("validate", help="check a dataset against the schema")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--templates", type=Path, default=None)

    p = sub.add_parser("fixture", help="write a synthetic ground-truth corpus")
    p.add_argument("--spec", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    return parser


_COMMANDS = {
    "generate": _cmd_generate,
    "score": _cmd_score,
    "baseline": _cmd_baseline,
    "validate": _cmd_validate,
    "fixture": _cmd_fixture,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FragqaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
