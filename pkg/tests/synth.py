"""Fast in-memory instance corpora for statistical tests (no pixels involved)."""

from __future__ import annotations

import numpy as np

from fragqa import taskgen
from fragqa.augment import speed_labels
from fragqa.core import RngKey
from fragqa.dataset import record_from_instance
from fragqa.ingest import PresenceMap
from fragqa.sampler import Fragment

_LABELS = speed_labels()
_SPEED_CYCLE = ("normal", "fast", "slow", "no_speed")


def synth_fragment(i: int, rng: np.random.Generator) -> Fragment:
    m = int(rng.integers(3, 6))
    start = int(rng.integers(0, 10))
    offsets = sorted(rng.permutation(20)[:m])
    return Fragment(
        video_id=f"v{i:05d}",
        indices=tuple(start + int(v) for v in offsets),
        strategy="random",
        set_id=0,
    )


def synth_instances(kind: str, count: int, dataset_seed: int = 0, corpus_seed: int = 99):
    """Generate `count` instances of one kind over varied synthetic fragments."""
    rng = np.random.Generator(np.random.PCG64(corpus_seed))
    out = []
    for i in range(count):
        frag = synth_fragment(i, rng)
        key = RngKey(dataset_seed, frag.video_id, kind, i)
        if kind == "counting":
            inst = taskgen.gen_counting(frag, key)
        elif kind == "consistency":
            inst = taskgen.gen_consistency(frag, "any", 0.5, key)
        elif kind.startswith("localization_"):
            variant = kind.split("_", 1)[1]
            n_frames = max(frag.indices) + 1
            present = rng.random(n_frames) < 0.5
            if not any(present[j] for j in frag.indices):
                present[frag.indices[0]] = True
            presence = PresenceMap(
                video_id=frag.video_id, target="thing",
                present=tuple(bool(v) for v in present),
            )
            inst = taskgen.gen_localization(frag, presence, "thing", variant, key)
        elif kind == "adjust_or_not":
            inst = taskgen.gen_disorder(frag, 0.5, key)
        elif kind == "rearrangement":
            inst = taskgen.gen_rearrangement(frag, key)
        elif kind == "speed":
            label = _LABELS[_SPEED_CYCLE[i % len(_SPEED_CYCLE)]]
            inst = taskgen.gen_speed_qa(
                frag.video_id, label, key, presented_indices=list(range(4))
            )
        else:
            raise ValueError(f"unknown kind {kind!r}")
        out.append(inst)
    return out


def records_for(instances, dataset_seed: int = 0) -> list[dict]:
    return [
        record_from_instance(
            inst,
            [f"frames/{inst.video_id}/{j:03d}.png" for j in range(len(inst.presented_indices))],
            "0.1.0",
            dataset_seed,
        )
        for inst in instances
    ]
