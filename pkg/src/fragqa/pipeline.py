"""End-to-end generation: ingest -> profile -> sample -> tasks -> speed QA -> emit.

Per-video work is pure and keyed, so a thread pool of any size produces the
same bytes; the writer consumes one id-sorted buffer.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .augment import DEFAULT_FACTORS, speed_labels, speed_transform
from .core import RngKey
from .dataset import build_manifest, emit, record_from_instance
from .errors import AnnotationError, IngestError, ManifestError, SkipVideo
from .ingest import FrameSequence, ManifestEntry, load_manifest, load_presence, load_sequence
from .sampler import SamplingPlan, build_plan, motion_profile
from .taskgen import DEFAULT_TEMPLATES, TASK_GROUPS, TaskGenConfig, gen_speed_qa, generate_for_fragment

# speed variants emitted per video: the original plus the two transforms
SPEED_EMISSION = ("normal", "fast", "slow")


@dataclass(frozen=True)
class PipelineConfig:
    manifest: Path
    out_dir: Path
    dataset_seed: int = 0
    n_sets: int = 3
    m_min: int = 3
    m_max: int = 5
    strategy: str = "motion_salient"
    range_mode: str = "any"
    p_same: float = 0.5
    p_shuffle: float = 0.5
    speed_factors: dict[str, Fraction] = field(default_factory=lambda: dict(DEFAULT_FACTORS))
    tasks: frozenset[str] = frozenset(TASK_GROUPS)
    strip_answers: bool = False
    downscale: Optional[int] = None
    workers: int = 1
    templates: dict[str, tuple[str, ...]] = field(default_factory=lambda: DEFAULT_TEMPLATES)


@dataclass
class GenerateResult:
    records: list[dict]
    manifest: dict
    skips: list[tuple[str, str]]
    written: dict[str, Path]
    videos_ok: int
    videos_total: int


def _frame_ref(source_path: str, out_dir: Path) -> str:
    rel = os.path.relpath(source_path, out_dir)
    return rel.replace(os.sep, "/")


def _speed_records(
    seq: FrameSequence,
    cfg: PipelineConfig,
    out_dir: Path,
    skips: list[tuple[str, str]],
) -> list[dict]:
    labels = speed_labels(cfg.speed_factors)
    source_index = {frame.source_path: frame.index for frame in seq.frames}
    records = []
    for position, value in enumerate(SPEED_EMISSION):
        label = labels[value]
        try:
            transformed = speed_transform(seq, label)
        except ValueError as exc:
            skips.append((seq.video_id, f"speed {value}: {exc}"))
            continue
        presented = [source_index[f.source_path] for f in transformed.frames]
        instance = gen_speed_qa(
            seq.video_id,
            label,
            RngKey(cfg.dataset_seed, seq.video_id, "speed", position),
            presented_indices=presented,
            templates=cfg.templates,
        )
        refs = [_frame_ref(f.source_path, out_dir) for f in transformed.frames]
        records.append(record_from_instance(instance, refs, __version__, cfg.dataset_seed))
    return records


def _process_video(
    entry: ManifestEntry, base_dir: Path, cfg: PipelineConfig
) -> tuple[list[dict], list[tuple[str, str]], bool]:
    """Returns (records, skip log entries, video_included)."""
    skips: list[tuple[str, str]] = []
    try:
        seq = load_sequence(entry, base_dir)
    except (IngestError, ManifestError) as exc:
        return [], [(entry.video_id, str(exc))], False
    profile = motion_profile(seq, cfg.downscale)
    plan = SamplingPlan(
        n_sets=cfg.n_sets,
        m_min=cfg.m_min,
        m_max=cfg.m_max,
        strategy=cfg.strategy,
        dataset_seed=cfg.dataset_seed,
    )
    try:
        fragments = build_plan(seq, plan, profile=profile)
    except SkipVideo as exc:
        return [], [(entry.video_id, str(exc))], False
    presence = None
    if entry.presence_sidecar:
        try:
            presence = load_presence(base_dir / entry.presence_sidecar, seq)
        except AnnotationError as exc:
            skips.append((entry.video_id, str(exc)))
    task_cfg = TaskGenConfig(
        range_mode=cfg.range_mode,
        p_same=cfg.p_same,
        p_shuffle=cfg.p_shuffle,
        tasks=cfg.tasks,
        templates=cfg.templates,
    )
    out_dir = Path(cfg.out_dir)
    records: list[dict] = []
    for fragment in fragments:
        instances, frag_skips = generate_for_fragment(
            seq, fragment, presence, task_cfg, cfg.dataset_seed
        )
        skips.extend(frag_skips)
        for instance in instances:
            refs = [
                _frame_ref(seq.frames[i].source_path, out_dir)
                for i in instance.presented_indices
            ]
            records.append(record_from_instance(instance, refs, __version__, cfg.dataset_seed))
    if "speed" in cfg.tasks:
        records.extend(_speed_records(seq, cfg, out_dir, skips))
    return records, skips, True


def generate_dataset(cfg: PipelineConfig) -> GenerateResult:
    video_manifest = load_manifest(cfg.manifest)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(
                pool.map(lambda e: _process_video(e, video_manifest.base_dir, cfg),
                         video_manifest.entries)
            )
    else:
        results = [_process_video(e, video_manifest.base_dir, cfg)
                   for e in video_manifest.entries]
    records: list[dict] = []
    skips: list[tuple[str, str]] = []
    videos: list[str] = []
    for entry, (video_records, video_skips, included) in zip(video_manifest.entries, results):
        records.extend(video_records)
        skips.extend(video_skips)
        if included:
            videos.append(entry.video_id)
    manifest = build_manifest(cfg.dataset_seed, records, videos, skips, cfg.strip_answers)
    written = emit(records, manifest, cfg.out_dir, strip_answers=cfg.strip_answers)
    return GenerateResult(
        records=records,
        manifest=manifest,
        skips=skips,
        written=written,
        videos_ok=len(videos),
        videos_total=len(video_manifest.entries),
    )
