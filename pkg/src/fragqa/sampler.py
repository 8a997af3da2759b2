"""Motion profiles and fragment selection strategies.

Motion magnitude is the exact integer sum of absolute grayscale differences
between consecutive frames (no optical flow). Four selection strategies are
supported: random, uniform, keyframe (top-motion transitions) and
motion-salient (inverse-CDF over the motion distribution).
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import RngKey
from .errors import IngestError, SkipVideo
from .ingest import FrameSequence

logger = logging.getLogger(__name__)

STRATEGIES = ("random", "uniform", "keyframe", "motion_salient")

# One initial draw plus this many redraws before a duplicate fragment is accepted.
_DISTINCT_RETRIES = 32


@dataclass(frozen=True)
class MotionProfile:
    """Per-transition motion magnitudes and their normalized cumulative distribution.

    magnitudes[i] is the change mass between frames i and i+1 (transition i+1
    in 1-based terms). cdf is empty when the profile is degenerate (all zero).
    """

    magnitudes: tuple[int, ...]
    cdf: tuple[float, ...]
    degenerate: bool


@dataclass(frozen=True)
class Fragment:
    video_id: str
    indices: tuple[int, ...]
    strategy: str
    set_id: int

    def __post_init__(self) -> None:
        if not (2 <= len(self.indices) <= 8):
            raise ValueError(f"fragment size {len(self.indices)} outside [2, 8]")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])) or self.indices[0] < 0:
            raise ValueError(f"fragment indices {self.indices} not strictly increasing")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class SamplingPlan:
    n_sets: int = 3
    m_min: int = 3
    m_max: int = 5
    strategy: str = "motion_salient"
    dataset_seed: int = 0
    midpoints: bool = False  # deterministic motion-salient quantiles

    def __post_init__(self) -> None:
        if self.n_sets < 1:
            raise ValueError("n_sets must be >= 1")
        if not (2 <= self.m_min <= self.m_max <= 8):
            raise ValueError(f"m range [{self.m_min}, {self.m_max}] not within [2, 8]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


def _downscale(pixels: np.ndarray, factor: int) -> np.ndarray:
    """k x k box mean with round-half-up; trailing remainder rows/cols dropped."""
    h = pixels.shape[0] // factor * factor
    w = pixels.shape[1] // factor * factor
    if h == 0 or w == 0:
        raise ValueError(f"downscale factor {factor} larger than frame")
    blocks = pixels[:h, :w].astype(np.int64)
    blocks = blocks.reshape(h // factor, factor, w // factor, factor).sum(axis=(1, 3))
    area = factor * factor
    return (2 * blocks + area) // (2 * area)


def motion_profile(seq: FrameSequence, downscale: Optional[int] = None) -> MotionProfile:
    """Exact integer motion magnitudes per transition, with normalized CDF."""
    shapes = {frame.pixels.shape for frame in seq.frames}
    if len(shapes) != 1:
        raise IngestError(f"{seq.video_id}: mixed frame dimensions {sorted(shapes)}")
    planes = [frame.pixels.astype(np.int64) for frame in seq.frames]
    if downscale is not None and downscale > 1:
        planes = [_downscale(p, int(downscale)) for p in planes]
    magnitudes = tuple(
        int(np.abs(b - a).sum()) for a, b in zip(planes, planes[1:])
    )
    total = sum(magnitudes)
    if total == 0:
        return MotionProfile(magnitudes=magnitudes, cdf=(), degenerate=True)
    running = 0
    cdf = []
    for m in magnitudes:
        running += m
        cdf.append(running / total)
    return MotionProfile(magnitudes=magnitudes, cdf=tuple(cdf), degenerate=False)


def _uniform_indices(n_frames: int, m: int) -> list[int]:
    # floor(i * (T-1) / (m-1) + 0.5), done in exact integer arithmetic
    span = n_frames - 1
    den = m - 1
    return [(2 * i * span + den) // (2 * den) for i in range(m)]


def _keyframe_indices(profile: MotionProfile, n_frames: int, m: int) -> list[int]:
    # top-m transitions by magnitude (ties -> lower index), each mapped to its
    # later frame; when transitions run out (m == T) frame 0 completes the set
    order = sorted(range(len(profile.magnitudes)), key=lambda i: (-profile.magnitudes[i], i))
    picked = sorted(order[: min(m, n_frames - 1)])
    indices = [i + 1 for i in picked]
    if len(indices) < m:
        indices = [0] + indices
    return indices


def _salient_indices(
    profile: MotionProfile,
    n_frames: int,
    m: int,
    rng: np.random.Generator,
    midpoints: bool,
) -> list[int]:
    chosen: list[int] = []
    used: set[int] = set()
    for i in range(m):
        lo, hi = i / m, (i + 1) / m
        q = (lo + hi) / 2 if midpoints else float(rng.uniform(lo, hi))
        # smallest transition position j with cdf[j] >= q maps to frame j+1
        frame = bisect_left(profile.cdf, q) + 1
        frame = min(frame, n_frames - 1)
        if frame in used:
            frame = _nearest_unused(frame, used, n_frames)
        used.add(frame)
        chosen.append(frame)
    return sorted(chosen)


def _nearest_unused(frame: int, used: set[int], n_frames: int) -> int:
    for candidate in range(frame + 1, n_frames):
        if candidate not in used:
            return candidate
    for candidate in range(frame - 1, -1, -1):
        if candidate not in used:
            return candidate
    raise ValueError("no unused frame index left")  # unreachable: m <= T


def _sample_indices(
    profile: MotionProfile,
    n_frames: int,
    m: int,
    strategy: str,
    rng: np.random.Generator,
    midpoints: bool,
) -> tuple[int, ...]:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not (2 <= m <= n_frames):
        raise ValueError(f"fragment size {m} invalid for {n_frames} frames")
    if profile.degenerate:
        strategy = "uniform"
    if strategy == "uniform":
        indices = _uniform_indices(n_frames, m)
    elif strategy == "random":
        indices = sorted(int(i) for i in rng.choice(n_frames, size=m, replace=False))
    elif strategy == "keyframe":
        indices = _keyframe_indices(profile, n_frames, m)
    else:
        indices = _salient_indices(profile, n_frames, m, rng, midpoints)
    return tuple(indices)


def sample_fragment(
    profile: MotionProfile,
    n_frames: int,
    m: int,
    strategy: str,
    key: RngKey,
    midpoints: bool = False,
) -> Fragment:
    """Select one fragment of m strictly increasing frame indices."""
    indices = _sample_indices(profile, n_frames, m, strategy, key.stream(), midpoints)
    return Fragment(
        video_id=key.video_id,
        indices=indices,
        strategy=strategy,
        set_id=key.instance_index,
    )


def build_plan(
    seq: FrameSequence,
    plan: SamplingPlan,
    profile: Optional[MotionProfile] = None,
    downscale: Optional[int] = None,
) -> list[Fragment]:
    """Draw n_sets fragments with sizes uniform over the plan's m range.

    Fragments are pairwise distinct as index sets; after 32 redraws a
    collision is accepted with a warning. A video shorter than m_min is
    skipped; an m range reaching past the video is clamped to its length.
    """
    n_frames = len(seq)
    if n_frames < plan.m_min:
        raise SkipVideo(f"{seq.video_id}: {n_frames} frames < minimum fragment size {plan.m_min}")
    if profile is None:
        profile = motion_profile(seq, downscale)
    m_hi = min(plan.m_max, n_frames)
    seen: set[tuple[int, ...]] = set()
    fragments: list[Fragment] = []
    for set_id in range(plan.n_sets):
        rng = RngKey(plan.dataset_seed, seq.video_id, "sampler.plan", set_id).stream()
        indices: tuple[int, ...] = ()
        for _ in range(1 + _DISTINCT_RETRIES):
            m = int(rng.integers(plan.m_min, m_hi + 1))
            indices = _sample_indices(profile, n_frames, m, plan.strategy, rng, plan.midpoints)
            if indices not in seen:
                break
        else:
            logger.warning(
                "%s: accepting duplicate fragment %s after %d redraws",
                seq.video_id, indices, _DISTINCT_RETRIES,
            )
        seen.add(indices)
        fragments.append(
            Fragment(video_id=seq.video_id, indices=indices, strategy=plan.strategy, set_id=set_id)
        )
    return fragments
