"""Multiple-choice task generation over fragments: counting, pair consistency,
target localization, order checking/restoration, and video speed.

Answer keys are pseudo-labels derived mechanically from construction (frame
count, chosen pair, presence map, shuffle permutation, speed label), never
from annotation. Each generator draws from its own keyed stream in a fixed
order — question template, content, option placement — so output is
reproducible regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .augment import SPEED_DISPLAY, SPEED_VALUES, SpeedLabel
from .core import (
    Permutation,
    RngKey,
    apply_permutation,
    invert_permutation,
    random_permutation,
)
from .errors import GenerationError, SkipInstance
from .ingest import FrameSequence, PresenceMap
from .sampler import Fragment

KIND_ORDER = (
    "counting",
    "consistency",
    "localization_first",
    "localization_last",
    "localization_exist",
    "adjust_or_not",
    "rearrangement",
    "speed",
)

# Option cardinality per kind; 4-option kinds sit at 25.00 random accuracy,
# 3-option kinds at 33.33.
OPTION_CARDINALITY = {
    "counting": 4,
    "consistency": 3,
    "localization_first": 4,
    "localization_last": 4,
    "localization_exist": 4,
    "adjust_or_not": 3,
    "rearrangement": 4,
    "speed": 4,
}

TASK_GROUPS = ("counting", "consistency", "localization", "adjust_or_not", "rearrangement", "speed")

LABELS = "ABCD"
YES, NO, NOT_SURE = "Yes", "No", "Not sure"
NO_APPEARANCE = "It does not appear"
COUNTING_ANSWER_SPACE = (2, 3, 4, 5, 6)
RANGE_MODES = ("any", "adjacent", "nonadjacent")
LOCALIZATION_VARIANTS = ("first", "last", "exist")

DEFAULT_TEMPLATES: dict[str, tuple[str, ...]] = {
    "counting": ("Could you please tell me how many frames I have inputted?",),
    "consistency": ("Are the two frames I provided exactly the same?",),
    "localization_first": (
        "In the sequence of frames provided, on which frame does the object first appear?",
    ),
    "localization_last": (
        "In the sequence of frames provided, on which frame does the object last appear?",
    ),
    "localization_exist": (
        "In the sequence of frames provided, in which frames does the object exist?",
    ),
    "adjust_or_not": (
        "These frames are all from the same video and capture the dynamic process of an action. "
        "The order of these frames may have been mixed up. Do we need to rearrange them to match "
        "the normal execution sequence of the action?",
    ),
    "rearrangement": (
        "These frames are all from the same video and depict the dynamic process of an action. "
        "The order of these frames may have been mixed up. Based on the connections between the "
        "image frames, which of the following options represents the most appropriate sequence?",
    ),
    "speed": ("What is the rate of movement in the video?",),
}


def load_template_bank(path: str | Path, base: Optional[dict[str, tuple[str, ...]]] = None) -> dict[str, tuple[str, ...]]:
    """Merge extra templates from a plain-text file into the default bank.

    Format: ``[kind]`` section headers, one template per line; blank lines
    and ``#`` comments ignored.
    """
    bank = {k: list(v) for k, v in (base or DEFAULT_TEMPLATES).items()}
    section = None
    for line_num, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in OPTION_CARDINALITY:
                raise ValueError(f"{path}:{line_num}: unknown task kind [{section}]")
            continue
        if section is None:
            raise ValueError(f"{path}:{line_num}: template before any [kind] header")
        if line not in bank[section]:
            bank[section].append(line)
    return {k: tuple(v) for k, v in bank.items()}


@dataclass(frozen=True)
class Option:
    label: str
    text: str


@dataclass(frozen=True)
class OptionSet:
    options: tuple[Option, ...]
    key_label: str

    def __post_init__(self) -> None:
        labels = [o.label for o in self.options]
        if labels != list(LABELS[: len(labels)]):
            raise ValueError(f"labels must be {LABELS[:len(labels)]} in order, got {labels}")
        texts = [o.text for o in self.options]
        if len(set(texts)) != len(texts):
            raise ValueError(f"option texts not pairwise distinct: {texts}")
        if self.key_label not in labels:
            raise ValueError(f"key label {self.key_label!r} not among {labels}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.options)

    def key_text(self) -> str:
        return next(o.text for o in self.options if o.label == self.key_label)


@dataclass(frozen=True)
class TaskInstance:
    id: str
    kind: str
    video_id: str
    presented_indices: tuple[int, ...]
    question: str
    option_set: OptionSet
    answer: str
    meta: dict


@dataclass(frozen=True)
class TaskGenConfig:
    range_mode: str = "any"
    p_same: float = 0.5
    p_shuffle: float = 0.5
    tasks: frozenset[str] = frozenset(TASK_GROUPS)
    templates: dict[str, tuple[str, ...]] = field(default_factory=lambda: DEFAULT_TEMPLATES)

    def __post_init__(self) -> None:
        if self.range_mode not in RANGE_MODES:
            raise ValueError(f"unknown range mode {self.range_mode!r}")
        unknown = self.tasks - set(TASK_GROUPS)
        if unknown:
            raise ValueError(f"unknown tasks {sorted(unknown)}")


def kind_group(kind: str) -> str:
    return "localization" if kind.startswith("localization_") else kind


def _ordinal(n: int) -> str:
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def _render_positions(mapping: Sequence[int]) -> str:
    return ", ".join(str(v + 1) for v in mapping)


def _pick_template(kind: str, templates: dict[str, tuple[str, ...]], rng: np.random.Generator) -> str:
    bank = templates[kind]
    if len(bank) == 1:  # no draw consumed for single-template banks
        return bank[0]
    return bank[int(rng.integers(len(bank)))]


def build_options(
    key_text: str,
    distractor_pool: Sequence[str],
    k: int,
    key: RngKey | np.random.Generator,
) -> OptionSet:
    """k options with the key at a uniformly random label, distractors drawn
    from the pool without replacement."""
    rng = key.stream() if isinstance(key, RngKey) else key
    pool = list(dict.fromkeys(t for t in distractor_pool if t != key_text))
    if len(pool) < k - 1:
        raise GenerationError(
            f"need {k - 1} distinct distractors for key {key_text!r}, pool has {len(pool)}"
        )
    if k > 1:
        chosen = [pool[i] for i in rng.permutation(len(pool))[: k - 1].tolist()]
    else:
        chosen = []
    key_pos = int(rng.integers(k))
    texts = chosen[:key_pos] + [key_text] + chosen[key_pos:]
    options = tuple(Option(label=LABELS[i], text=t) for i, t in enumerate(texts))
    return OptionSet(options=options, key_label=LABELS[key_pos])


def _instance(
    key: RngKey,
    kind: str,
    video_id: str,
    presented: Sequence[int],
    question: str,
    option_set: OptionSet,
    meta: dict,
) -> TaskInstance:
    return TaskInstance(
        id=key.instance_id(),
        kind=kind,
        video_id=video_id,
        presented_indices=tuple(int(i) for i in presented),
        question=question,
        option_set=option_set,
        answer=option_set.key_label,
        meta=meta,
    )


def _fragment_meta(fragment: Fragment) -> dict:
    return {
        "m": len(fragment.indices),
        "strategy": fragment.strategy,
        "fragment_id": f"{fragment.video_id}/{fragment.set_id}",
    }


def gen_counting(
    fragment: Fragment,
    key: RngKey,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    m = len(fragment.indices)
    if not (COUNTING_ANSWER_SPACE[0] <= m <= COUNTING_ANSWER_SPACE[-1]):
        raise ValueError(f"counting needs fragment size in {COUNTING_ANSWER_SPACE}, got {m}")
    rng = key.stream()
    question = _pick_template("counting", templates, rng)
    pool = [str(v) for v in COUNTING_ANSWER_SPACE if v != m]
    option_set = build_options(str(m), pool, OPTION_CARDINALITY["counting"], rng)
    return _instance(
        key, "counting", fragment.video_id, fragment.indices, question, option_set,
        _fragment_meta(fragment),
    )


def gen_consistency(
    fragment: Fragment,
    range_mode: str,
    p_same: float,
    key: RngKey,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    if range_mode not in RANGE_MODES:
        raise ValueError(f"unknown range mode {range_mode!r}")
    m = len(fragment.indices)
    rng = key.stream()
    question = _pick_template("consistency", templates, rng)
    same = bool(rng.random() < p_same)
    if same:
        pos = int(rng.integers(m))
        pair = (pos, pos)
    else:
        if range_mode == "adjacent":
            pairs = [(i, i + 1) for i in range(m - 1)]
        elif range_mode == "nonadjacent":
            pairs = [(i, j) for i in range(m) for j in range(i + 2, m)]
        else:
            pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        if not pairs:
            raise GenerationError(f"range mode {range_mode!r} unsatisfiable for m={m}")
        pair = pairs[int(rng.integers(len(pairs)))]
    presented = (fragment.indices[pair[0]], fragment.indices[pair[1]])
    key_text = YES if same else NO
    pool = [t for t in (YES, NO, NOT_SURE) if t != key_text]
    option_set = build_options(key_text, pool, OPTION_CARDINALITY["consistency"], rng)
    meta = _fragment_meta(fragment)
    meta["range_mode"] = range_mode
    return _instance(
        key, "consistency", fragment.video_id, presented, question, option_set, meta
    )


def gen_localization(
    fragment: Fragment,
    presence: PresenceMap,
    target: str,
    variant: str,
    key: RngKey,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    if variant not in LOCALIZATION_VARIANTS:
        raise ValueError(f"unknown localization variant {variant!r}")
    m = len(fragment.indices)
    restricted = [presence.present[i] for i in fragment.indices]
    true_positions = [p for p, flag in enumerate(restricted) if flag]
    if not true_positions:
        raise SkipInstance(f"{fragment.video_id}: target absent from fragment {fragment.set_id}")
    kind = f"localization_{variant}"
    rng = key.stream()
    question = _pick_template(kind, templates, rng)
    if variant == "exist":
        key_text = ", ".join(_ordinal(p + 1) for p in true_positions)
        # distractors are distinct nonempty position subsets drawn as bitmasks
        key_mask = sum(1 << p for p in true_positions)
        masks: list[int] = []
        while len(masks) < OPTION_CARDINALITY[kind] - 1:
            candidate = int(rng.integers(1, 2**m))
            if candidate != key_mask and candidate not in masks:
                masks.append(candidate)
        pool = [
            ", ".join(_ordinal(p + 1) for p in range(m) if mask & (1 << p))
            for mask in masks
        ]
    else:
        pos = true_positions[0] if variant == "first" else true_positions[-1]
        key_text = f"{_ordinal(pos + 1)} frame"
        pool = [f"{_ordinal(p + 1)} frame" for p in range(m) if p != pos]
        if len(pool) < OPTION_CARDINALITY[kind] - 1:
            pool.append(NO_APPEARANCE)
    option_set = build_options(key_text, pool, OPTION_CARDINALITY[kind], rng)
    meta = _fragment_meta(fragment)
    meta["target"] = target
    return _instance(key, kind, fragment.video_id, fragment.indices, question, option_set, meta)


def gen_disorder(
    fragment: Fragment,
    p_shuffle: float,
    key: RngKey,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    m = len(fragment.indices)
    if m < 3:
        raise ValueError(f"order checking needs at least 3 frames, got {m}")
    rng = key.stream()
    question = _pick_template("adjust_or_not", templates, rng)
    meta = _fragment_meta(fragment)
    if bool(rng.random() < p_shuffle):
        perm = random_permutation(m, exclude_identity=True, key=rng)
        presented = apply_permutation(perm, fragment.indices)
        key_text = YES
        meta["permutation"] = list(perm.mapping)
    else:
        presented = list(fragment.indices)
        key_text = NO
    pool = [t for t in (YES, NO, NOT_SURE) if t != key_text]
    option_set = build_options(key_text, pool, OPTION_CARDINALITY["adjust_or_not"], rng)
    return _instance(
        key, "adjust_or_not", fragment.video_id, presented, question, option_set, meta
    )


def _distinct_permutations(
    answer: Permutation, count: int, rng: np.random.Generator
) -> list[Permutation]:
    m = answer.size
    found: list[Permutation] = []
    seen = {answer.mapping}
    for _ in range(64):
        if len(found) >= count:
            break
        candidate = random_permutation(m, key=rng)
        if candidate.mapping not in seen:
            seen.add(candidate.mapping)
            found.append(candidate)
    if len(found) < count:  # tiny spaces: fill lexicographically
        for mapping in permutations(range(m)):
            if len(found) >= count:
                break
            if mapping not in seen:
                seen.add(mapping)
                found.append(Permutation(mapping))
    return found


def gen_rearrangement(
    fragment: Fragment,
    key: RngKey,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    m = len(fragment.indices)
    if m < 3:
        raise ValueError(f"rearrangement needs at least 3 frames, got {m}")
    rng = key.stream()
    question = _pick_template("rearrangement", templates, rng)
    perm = random_permutation(m, exclude_identity=True, key=rng)
    presented = apply_permutation(perm, fragment.indices)
    answer_perm = invert_permutation(perm)
    key_text = _render_positions(answer_perm.mapping)
    distractors = _distinct_permutations(answer_perm, OPTION_CARDINALITY["rearrangement"] - 1, rng)
    pool = [_render_positions(d.mapping) for d in distractors]
    option_set = build_options(key_text, pool, OPTION_CARDINALITY["rearrangement"], rng)
    meta = _fragment_meta(fragment)
    meta["permutation"] = list(perm.mapping)
    return _instance(
        key, "rearrangement", fragment.video_id, presented, question, option_set, meta
    )


def gen_speed_qa(
    video_id: str,
    label: SpeedLabel,
    key: RngKey,
    presented_indices: Sequence[int] = (),
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> TaskInstance:
    rng = key.stream()
    question = _pick_template("speed", templates, rng)
    key_text = label.display
    pool = [SPEED_DISPLAY[v] for v in SPEED_VALUES if SPEED_DISPLAY[v] != key_text]
    option_set = build_options(key_text, pool, OPTION_CARDINALITY["speed"], rng)
    meta = {"m": None, "strategy": None, "speed_label": label.value}
    return _instance(key, "speed", video_id, presented_indices, question, option_set, meta)


def fragment_is_static(seq: FrameSequence, fragment: Fragment) -> bool:
    """True when every selected frame is byte-identical (order unrecoverable)."""
    first = seq.frames[fragment.indices[0]].pixels
    return all(
        np.array_equal(seq.frames[i].pixels, first) for i in fragment.indices[1:]
    )


def generate_for_fragment(
    seq: FrameSequence,
    fragment: Fragment,
    presence: Optional[PresenceMap],
    cfg: TaskGenConfig,
    dataset_seed: int,
) -> tuple[list[TaskInstance], list[tuple[str, str]]]:
    """Emit the enabled per-fragment tasks; returns (instances, skip log entries)."""
    instances: list[TaskInstance] = []
    skips: list[tuple[str, str]] = []
    vid, set_id = seq.video_id, fragment.set_id
    m = len(fragment.indices)

    def task_key(kind: str) -> RngKey:
        return RngKey(dataset_seed, vid, kind, set_id)

    if "counting" in cfg.tasks:
        if COUNTING_ANSWER_SPACE[0] <= m <= COUNTING_ANSWER_SPACE[-1]:
            instances.append(gen_counting(fragment, task_key("counting"), cfg.templates))
        else:
            skips.append((vid, f"set {set_id}: size {m} outside counting answer space"))
    if "consistency" in cfg.tasks:
        try:
            instances.append(
                gen_consistency(fragment, cfg.range_mode, cfg.p_same,
                                task_key("consistency"), cfg.templates)
            )
        except GenerationError as exc:
            skips.append((vid, f"set {set_id}: {exc}"))
    if "localization" in cfg.tasks and presence is not None:
        variant_rng = RngKey(dataset_seed, vid, "localization.variant", set_id).stream()
        variant = LOCALIZATION_VARIANTS[int(variant_rng.integers(len(LOCALIZATION_VARIANTS)))]
        try:
            instances.append(
                gen_localization(fragment, presence, presence.target, variant,
                                 task_key("localization"), cfg.templates)
            )
        except SkipInstance as exc:
            skips.append((vid, str(exc)))
    order_tasks = {"adjust_or_not", "rearrangement"} & cfg.tasks
    if order_tasks and m >= 3:
        if fragment_is_static(seq, fragment):
            skips.append((vid, f"set {set_id}: static fragment, order tasks dropped"))
        else:
            if "adjust_or_not" in cfg.tasks:
                instances.append(
                    gen_disorder(fragment, cfg.p_shuffle, task_key("adjust_or_not"), cfg.templates)
                )
            if "rearrangement" in cfg.tasks:
                instances.append(
                    gen_rearrangement(fragment, task_key("rearrangement"), cfg.templates)
                )
    elif order_tasks and m < 3:
        skips.append((vid, f"set {set_id}: size {m} too small for order tasks"))
    return instances, skips
