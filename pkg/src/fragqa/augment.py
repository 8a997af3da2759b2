"""Speed transformations: frame skipping, duplication/interpolation, freezing.

fast(k) keeps every k-th frame; slow(1/k) repeats each frame k times (or
inserts linearly blended intermediates in blend mode); no_speed freezes the
clip on its highest-motion frame, which makes the result detectable by a
degenerate motion profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ingest import Frame, FrameSequence
from .sampler import MotionProfile, motion_profile

SPEED_VALUES = ("fast", "slow", "normal", "no_speed")
SPEED_DISPLAY = {"fast": "fast", "slow": "slow", "normal": "normal", "no_speed": "no speed"}
DEFAULT_FACTORS = {
    "fast": Fraction(2),
    "slow": Fraction(1, 2),
    "normal": Fraction(1),
    "no_speed": Fraction(0),
}


@dataclass(frozen=True)
class SpeedLabel:
    value: str
    factor: Fraction

    def __post_init__(self) -> None:
        if self.value not in SPEED_VALUES:
            raise ValueError(f"unknown speed label {self.value!r}")
        if self.value == "normal" and self.factor != 1:
            raise ValueError("normal speed must have factor 1")
        if self.value == "no_speed" and self.factor != 0:
            raise ValueError("no_speed must have factor 0")
        if self.value == "fast" and (self.factor.denominator != 1 or self.factor < 2):
            raise ValueError(f"fast factor must be an integer >= 2, got {self.factor}")
        if self.value == "slow" and (self.factor.numerator != 1 or self.factor >= 1):
            raise ValueError(f"slow factor must be 1/k with k >= 2, got {self.factor}")

    @property
    def display(self) -> str:
        return SPEED_DISPLAY[self.value]


def speed_labels(factors: dict[str, Fraction] | None = None) -> dict[str, SpeedLabel]:
    table = dict(DEFAULT_FACTORS)
    if factors:
        table.update(factors)
    return {value: SpeedLabel(value=value, factor=table[value]) for value in SPEED_VALUES}


def _blend(a: np.ndarray, b: np.ndarray, j: int, k: int) -> np.ndarray:
    # pixel = (a*(k-j) + b*j) / k, rounded half up
    num = a.astype(np.int64) * (k - j) + b.astype(np.int64) * j
    return ((2 * num + k) // (2 * k)).astype(np.uint8)


def speed_transform(
    seq: FrameSequence,
    label: SpeedLabel,
    blend: bool = False,
    profile: MotionProfile | None = None,
) -> FrameSequence:
    """Produce the speed-varied version of a sequence under the given label."""
    frames = seq.frames
    if label.value == "normal":
        out = [Frame(index=i, pixels=f.pixels, source_path=f.source_path)
               for i, f in enumerate(frames)]
    elif label.value == "fast":
        step = int(label.factor)
        if step >= len(frames):
            raise ValueError(f"fast factor {step} >= sequence length {len(frames)}")
        kept = frames[::step]
        out = [Frame(index=i, pixels=f.pixels, source_path=f.source_path)
               for i, f in enumerate(kept)]
    elif label.value == "slow":
        k = int(1 / label.factor)
        out = []
        for pos, frame in enumerate(frames):
            for j in range(k):
                if blend and j > 0 and pos + 1 < len(frames):
                    pixels = _blend(frame.pixels, frames[pos + 1].pixels, j, k)
                    path = ""  # blended frames have no source file
                else:
                    pixels = frame.pixels
                    path = frame.source_path
                out.append(Frame(index=len(out), pixels=pixels, source_path=path))
    else:  # no_speed: freeze on the later frame of the strongest transition
        if profile is None:
            profile = motion_profile(seq)
        if profile.degenerate:
            freeze = 0
        else:
            peak = min(range(len(profile.magnitudes)),
                       key=lambda i: (-profile.magnitudes[i], i))
            freeze = peak + 1
        source = frames[freeze]
        out = [Frame(index=i, pixels=source.pixels, source_path=source.source_path)
               for i in range(len(frames))]
    return FrameSequence(
        video_id=seq.video_id,
        frames=tuple(out),
        fps_hint=seq.fps_hint,
        metadata_target=seq.metadata_target,
    )
