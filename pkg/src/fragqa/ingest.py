"""Frame-sequence loading, manifests, presence sidecars and synthetic fixtures.

Input videos are pre-extracted frame directories (zero-padded decimal
filenames, common image extension). Container decoding stays outside the
artifact: an external decoder is invoked through a user-configured command
template with ``{input}`` and ``{outdir}`` placeholders.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import RngKey
from .errors import AnnotationError, IngestError, ManifestError

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}
MIN_FRAME_SIDE = 8
MARKER_SIDE = 8
MARKER_VALUE = 255
# Per-pixel intensity step used when laying down synthetic motion mass.
# Values seeded in [64, 191] provably stay inside [32, 223] under +-96 moves.
_MOTION_STEP = 96


@dataclass(frozen=True)
class Frame:
    index: int
    pixels: np.ndarray  # uint8, shape (height, width)
    source_path: str

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class FrameSequence:
    video_id: str
    frames: tuple[Frame, ...]
    fps_hint: Optional[float] = None
    metadata_target: Optional[str] = None

    def __post_init__(self) -> None:
        if len(self.frames) < 2:
            raise ValueError(f"{self.video_id}: a sequence needs at least 2 frames")
        for pos, frame in enumerate(self.frames):
            if frame.index != pos:
                raise ValueError(f"{self.video_id}: frame indices must be 0..n-1 without gaps")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class PresenceMap:
    video_id: str
    target: str
    present: tuple[bool, ...]

    @property
    def any_present(self) -> bool:
        # all-false maps load fine but taskgen skips localization on them
        return any(self.present)


@dataclass(frozen=True)
class ManifestEntry:
    video_id: str
    frame_directory: str
    frame_count: int
    metadata_target: Optional[str] = None
    presence_sidecar: Optional[str] = None


@dataclass(frozen=True)
class VideoManifest:
    version: int
    entries: tuple[ManifestEntry, ...]
    base_dir: Path  # directory the manifest was loaded from; paths resolve against it

    def __post_init__(self) -> None:
        ids = [e.video_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ManifestError("duplicate video_id in manifest")


@dataclass(frozen=True)
class MotionTruth:
    """Designed per-transition absolute pixel-change mass of a fixture."""

    masses: tuple[int, ...]


@dataclass(frozen=True)
class FixtureSpec:
    video_id: str
    frame_count: int
    width: int = 32
    height: int = 24
    marker_schedule: Optional[tuple[bool, ...]] = None
    motion_schedule: tuple[int, ...] = field(default_factory=tuple)
    target: str = "marker"


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luma conversion 0.299 R + 0.587 G + 0.114 B, rounded half up, exact in ints."""
    r = rgb[..., 0].astype(np.int64)
    g = rgb[..., 1].astype(np.int64)
    b = rgb[..., 2].astype(np.int64)
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def load_manifest(path: str | Path) -> VideoManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "entries" not in raw:
        raise ManifestError(f"manifest {path} must be an object with an 'entries' list")
    entries = []
    for num, item in enumerate(raw["entries"]):
        try:
            entries.append(
                ManifestEntry(
                    video_id=str(item["video_id"]),
                    frame_directory=str(item["frame_directory"]),
                    frame_count=int(item["frame_count"]),
                    metadata_target=item.get("metadata_target"),
                    presence_sidecar=item.get("presence_sidecar"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"manifest entry #{num} malformed: {exc}") from exc
    base_dir = path.parent.resolve()
    for entry in entries:
        if not (base_dir / entry.frame_directory).is_dir():
            raise ManifestError(
                f"{entry.video_id}: frame directory {entry.frame_directory!r} not resolvable"
            )
        if entry.presence_sidecar and not (base_dir / entry.presence_sidecar).is_file():
            raise ManifestError(
                f"{entry.video_id}: presence sidecar {entry.presence_sidecar!r} not resolvable"
            )
    return VideoManifest(version=int(raw.get("version", 1)), entries=tuple(entries),
                         base_dir=base_dir)


def _decode_frame(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                arr = np.asarray(img, dtype=np.uint8)
            else:
                arr = rgb_to_gray(np.asarray(img.convert("RGB"), dtype=np.uint8))
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise IngestError(f"cannot decode frame {path}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] < MIN_FRAME_SIDE or arr.shape[1] < MIN_FRAME_SIDE:
        raise IngestError(f"frame {path} smaller than {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}")
    return arr


def load_sequence(entry: ManifestEntry, base_dir: str | Path = ".") -> FrameSequence:
    """Decode one frame directory into a grayscale FrameSequence.

    Filenames must be zero-padded decimals covering 0..n-1; a gap, duplicate
    index or count mismatch against the manifest is a manifest error.
    """
    directory = Path(base_dir) / entry.frame_directory
    if not directory.is_dir():
        raise ManifestError(f"{entry.video_id}: frame directory {directory} does not exist")
    indexed: dict[int, Path] = {}
    for child in sorted(directory.iterdir()):
        if child.suffix.lower() not in IMAGE_EXTENSIONS:
            continue
        if not child.stem.isdigit():
            raise IngestError(f"{entry.video_id}: unexpected frame filename {child.name}")
        idx = int(child.stem)
        if idx in indexed:
            raise ManifestError(f"{entry.video_id}: duplicate frame index {idx}")
        indexed[idx] = child
    if len(indexed) < 2:
        raise ManifestError(f"{entry.video_id}: fewer than 2 frames in {directory}")
    if sorted(indexed) != list(range(len(indexed))):
        missing = sorted(set(range(max(indexed) + 1)) - set(indexed))
        raise ManifestError(f"{entry.video_id}: frame index gap (missing {missing})")
    if len(indexed) != entry.frame_count:
        raise ManifestError(
            f"{entry.video_id}: manifest says {entry.frame_count} frames, found {len(indexed)}"
        )
    frames = tuple(
        Frame(index=i, pixels=_decode_frame(indexed[i]), source_path=str(indexed[i].resolve()))
        for i in range(len(indexed))
    )
    return FrameSequence(
        video_id=entry.video_id,
        frames=frames,
        metadata_target=entry.metadata_target,
    )


def load_presence(path: str | Path, sequence: FrameSequence) -> PresenceMap:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise AnnotationError(f"cannot read presence sidecar {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"presence sidecar {path} is not valid JSON: {exc}") from exc
    video_id = raw.get("video_id")
    if video_id != sequence.video_id:
        raise AnnotationError(
            f"sidecar {path} is for video {video_id!r}, not {sequence.video_id!r}"
        )
    present = raw.get("present")
    if not isinstance(present, list) or not all(isinstance(v, bool) for v in present):
        raise AnnotationError(f"sidecar {path}: 'present' must be a list of booleans")
    if len(present) != len(sequence):
        raise AnnotationError(
            f"sidecar {path}: {len(present)} entries for a {len(sequence)}-frame video"
        )
    return PresenceMap(
        video_id=sequence.video_id,
        target=str(raw.get("target", "")),
        present=tuple(present),
    )


def _spread_motion(
    canvas: np.ndarray, mass: int, scan: list[tuple[int, int]], start: int
) -> None:
    """Mutate canvas so the absolute intensity change sums exactly to mass.

    The scan order is rotated per transition so consecutive transitions touch
    different pixels; otherwise two leading pixels would oscillate and frames
    an even number of transitions apart would come out byte-identical.
    """
    remaining = int(mass)
    for pos in range(len(scan)):
        if remaining == 0:
            return
        r, c = scan[(start + pos) % len(scan)]
        delta = min(_MOTION_STEP, remaining)
        if canvas[r, c] <= 127:
            canvas[r, c] += delta
        else:
            canvas[r, c] -= delta
        remaining -= delta
    if remaining:
        raise ValueError(
            f"motion mass {mass} exceeds region capacity {len(scan) * _MOTION_STEP}"
        )


def synthesize_fixture(
    spec: FixtureSpec, key: RngKey
) -> tuple[FrameSequence, PresenceMap, MotionTruth]:
    """Build a ground-truth sequence with designed motion and marker presence.

    Frames carry a bright 8x8 marker patch (top-left) exactly on scheduled
    frames; per-transition pixel change equals motion_schedule plus the
    analytically known marker-toggle delta, recorded in MotionTruth.
    """
    if spec.frame_count < 2:
        raise ValueError("frame_count must be >= 2")
    if spec.width < MARKER_SIDE or spec.height < MARKER_SIDE:
        raise ValueError(f"marker {MARKER_SIDE}x{MARKER_SIDE} larger than frame")
    marker = spec.marker_schedule or tuple([False] * spec.frame_count)
    if len(marker) != spec.frame_count:
        raise ValueError("marker_schedule length must equal frame_count")
    motion = tuple(int(m) for m in spec.motion_schedule) or tuple([0] * (spec.frame_count - 1))
    if len(motion) != spec.frame_count - 1:
        raise ValueError("motion_schedule needs frame_count - 1 entries")
    if any(m < 0 for m in motion):
        raise ValueError("motion masses must be non-negative")

    rng = key.stream()
    canvas = rng.integers(64, 192, size=(spec.height, spec.width), dtype=np.int16)
    scan = [
        (r, c)
        for r in range(spec.height)
        for c in range(spec.width)
        if not (r < MARKER_SIDE and c < MARKER_SIDE)
    ]
    zone = canvas[:MARKER_SIDE, :MARKER_SIDE]
    toggle_mass = int(np.abs(MARKER_VALUE - zone.astype(np.int64)).sum())

    def render(t: int) -> np.ndarray:
        out = canvas.astype(np.uint8).copy()
        if marker[t]:
            out[:MARKER_SIDE, :MARKER_SIDE] = MARKER_VALUE
        return out

    frames = [Frame(index=0, pixels=render(0), source_path=f"<fixture:{spec.video_id}>/0")]
    masses = []
    for t in range(1, spec.frame_count):
        _spread_motion(canvas, motion[t - 1], scan, start=(t * 131) % len(scan))
        frames.append(
            Frame(index=t, pixels=render(t), source_path=f"<fixture:{spec.video_id}>/{t}")
        )
        masses.append(motion[t - 1] + (toggle_mass if marker[t] != marker[t - 1] else 0))

    sequence = FrameSequence(
        video_id=spec.video_id,
        frames=tuple(frames),
        metadata_target=spec.target if spec.marker_schedule else None,
    )
    presence = PresenceMap(video_id=spec.video_id, target=spec.target, present=tuple(marker))
    return sequence, presence, MotionTruth(masses=tuple(masses))


def write_fixture(
    sequence: FrameSequence,
    presence: Optional[PresenceMap],
    out_dir: str | Path,
) -> ManifestEntry:
    """Write a fixture to disk in the frame-directory convention and return its entry."""
    out_dir = Path(out_dir)
    frame_dir = out_dir / "frames" / sequence.video_id
    frame_dir.mkdir(parents=True, exist_ok=True)
    pad = max(3, len(str(len(sequence) - 1)))
    for frame in sequence.frames:
        Image.fromarray(frame.pixels, mode="L").save(frame_dir / f"{frame.index:0{pad}d}.png")
    sidecar = None
    if presence is not None:
        sidecar = f"{sequence.video_id}.presence.json"
        (out_dir / sidecar).write_text(
            json.dumps(
                {
                    "video_id": presence.video_id,
                    "target": presence.target,
                    "present": list(presence.present),
                },
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
    return ManifestEntry(
        video_id=sequence.video_id,
        frame_directory=f"frames/{sequence.video_id}",
        frame_count=len(sequence),
        metadata_target=presence.target if presence is not None else None,
        presence_sidecar=sidecar,
    )


def write_manifest(entries: list[ManifestEntry], out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": 1,
        "entries": [
            {
                "video_id": e.video_id,
                "frame_directory": e.frame_directory,
                "frame_count": e.frame_count,
                **({"metadata_target": e.metadata_target} if e.metadata_target else {}),
                **({"presence_sidecar": e.presence_sidecar} if e.presence_sidecar else {}),
            }
            for e in entries
        ],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_decoder(command_template: str, input_path: str | Path, outdir: str | Path) -> None:
    """Invoke the external decoder; nonzero exit is an ingest error."""
    try:
        command = command_template.format(input=str(input_path), outdir=str(outdir))
    except (KeyError, IndexError) as exc:
        raise ValueError(f"bad decoder template {command_template!r}: {exc}") from exc
    result = subprocess.run(shlex.split(command), capture_output=True, text=True)
    if result.returncode != 0:
        raise IngestError(
            f"decoder exited {result.returncode} for {input_path}: {result.stderr.strip()}"
        )
