"""Deterministic on-disk dataset format: JSON Lines records plus a manifest.

One record per line, UTF-8, sorted keys, sorted by id, so re-running the
pipeline with identical inputs yields byte-identical files. The
``strip_answers`` mode writes a query-only file plus a separate key file so
evaluation consumers never see answers (answer-revealing meta fields are
stripped with it).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .augment import SPEED_DISPLAY
from .core import Permutation, apply_permutation
from .errors import EmitError, ValidationError
from .taskgen import (
    DEFAULT_TEMPLATES,
    LABELS,
    NO,
    NOT_SURE,
    OPTION_CARDINALITY,
    YES,
    TaskInstance,
)

DATA_FILE = "data.jsonl"
QUERY_FILE = "queries.jsonl"
KEY_FILE = "keys.jsonl"
MANIFEST_FILE = "manifest.json"

# meta fields that reconstruct the answer; removed in strip_answers mode
LEAKY_META = ("permutation", "speed_label")

_STRICT_KINDS = {"counting", "localization_first", "localization_last", "localization_exist"}
_NONDECREASING_KINDS = {"consistency", "speed"}
_SHUFFLED_KINDS = {"adjust_or_not", "rearrangement"}


def record_from_instance(
    instance: TaskInstance,
    frame_refs: list[str],
    generator_version: str,
    dataset_seed: int,
) -> dict:
    return {
        "id": instance.id,
        "kind": instance.kind,
        "video_id": instance.video_id,
        "frame_refs": list(frame_refs),
        "presented_indices": [int(i) for i in instance.presented_indices],
        "question": instance.question,
        "options": [{"label": o.label, "text": o.text} for o in instance.option_set.options],
        "answer": instance.answer,
        "meta": {k: v for k, v in instance.meta.items() if v is not None},
        "generator_version": generator_version,
        "dataset_seed": int(dataset_seed),
    }


def build_manifest(
    dataset_seed: int,
    records: list[dict],
    videos: list[str],
    skips: list[tuple[str, str]],
    stripped: bool = False,
) -> dict:
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec["kind"]] = counts.get(rec["kind"], 0) + 1
    return {
        "version": 1,
        "dataset_seed": int(dataset_seed),
        "counts": dict(sorted(counts.items())),
        "videos": sorted(videos),
        "skips": sorted([list(s) for s in skips]),
        "stripped": bool(stripped),
    }


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"


def emit(
    records: list[dict],
    manifest: dict,
    out_dir: str | Path,
    strip_answers: bool = False,
) -> dict[str, Path]:
    """Write the dataset; returns the paths written, keyed by role."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=lambda r: r["id"])
    ids = [r["id"] for r in ordered]
    if len(ids) != len(set(ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise EmitError(f"duplicate record ids: {dupes}")
    manifest = dict(manifest)
    manifest["stripped"] = bool(strip_answers)
    written: dict[str, Path] = {}
    if strip_answers:
        query_path = out_dir / QUERY_FILE
        key_path = out_dir / KEY_FILE
        with query_path.open("w", encoding="utf-8", newline="\n") as qf, \
                key_path.open("w", encoding="utf-8", newline="\n") as kf:
            for rec in ordered:
                query = {k: v for k, v in rec.items() if k != "answer"}
                query["meta"] = {k: v for k, v in rec["meta"].items() if k not in LEAKY_META}
                qf.write(_dump_line(query))
                kf.write(_dump_line({"id": rec["id"], "answer": rec["answer"]}))
        written["queries"] = query_path
        written["keys"] = key_path
    else:
        data_path = out_dir / DATA_FILE
        with data_path.open("w", encoding="utf-8", newline="\n") as df:
            for rec in ordered:
                df.write(_dump_line(rec))
        written["data"] = data_path
    manifest_path = out_dir / MANIFEST_FILE
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    written["manifest"] = manifest_path
    return written


def _fail(rid: str, field: str, problem: str) -> None:
    raise ValidationError(f"record {rid}: {field}: {problem}")


def _check_options(rid: str, rec: dict) -> list[str]:
    kind = rec["kind"]
    options = rec.get("options")
    if not isinstance(options, list):
        _fail(rid, "options", "must be a list")
    if len(options) != OPTION_CARDINALITY[kind]:
        _fail(rid, "options", f"{kind} needs {OPTION_CARDINALITY[kind]} options, got {len(options)}")
    labels, texts = [], []
    for opt in options:
        if not isinstance(opt, dict) or set(opt) != {"label", "text"}:
            _fail(rid, "options", f"malformed option {opt!r}")
        labels.append(opt["label"])
        texts.append(opt["text"])
    if labels != list(LABELS[: len(labels)]):
        _fail(rid, "options", f"labels must be {LABELS[:len(labels)]} in order, got {labels}")
    if len(set(texts)) != len(texts):
        _fail(rid, "options", f"duplicate option texts {texts}")
    if any(not isinstance(t, str) or not t for t in texts):
        _fail(rid, "options", "option texts must be nonempty strings")
    return texts


def _parse_permutation_text(rid: str, text: str, m: int) -> list[int]:
    try:
        values = [int(part.strip()) - 1 for part in text.split(",")]
    except ValueError:
        _fail(rid, "answer", f"key text {text!r} is not a position list")
    if sorted(values) != list(range(m)):
        _fail(rid, "answer", f"key text {text!r} is not a permutation of 1..{m}")
    return values


def _check_semantics(rid: str, rec: dict) -> None:
    kind = rec["kind"]
    presented = rec["presented_indices"]
    options = {o["label"]: o["text"] for o in rec["options"]}
    key_text = options[rec["answer"]]
    texts = set(options.values())
    if kind == "counting":
        if key_text != str(len(presented)):
            _fail(rid, "answer", f"counting key {key_text!r} != frame count {len(presented)}")
    elif kind == "consistency":
        if texts != {YES, NO, NOT_SURE}:
            _fail(rid, "options", f"consistency options must be Yes/No/Not sure, got {sorted(texts)}")
        expected = YES if presented[0] == presented[1] else NO
        if key_text != expected:  # "Not sure" is never a valid key
            _fail(rid, "answer", f"consistency key {key_text!r} inconsistent with pair {presented}")
    elif kind == "adjust_or_not":
        if texts != {YES, NO, NOT_SURE}:
            _fail(rid, "options", f"order-check options must be Yes/No/Not sure, got {sorted(texts)}")
        expected = YES if presented != sorted(presented) else NO
        if key_text != expected:
            _fail(rid, "answer", f"order-check key {key_text!r} inconsistent with {presented}")
    elif kind == "rearrangement":
        mapping = _parse_permutation_text(rid, key_text, len(presented))
        restored = [presented[j] for j in mapping]
        if restored != sorted(presented):
            _fail(rid, "answer", f"key permutation {key_text!r} does not restore {presented}")
    elif kind == "speed":
        if texts != set(SPEED_DISPLAY.values()):
            _fail(rid, "options", f"speed options must be the four speeds, got {sorted(texts)}")
        speed_label = rec["meta"].get("speed_label")
        if speed_label is not None and SPEED_DISPLAY.get(speed_label) != key_text:
            _fail(rid, "answer", f"speed key {key_text!r} != label {speed_label!r}")
    else:  # localization variants
        m = rec["meta"]["m"]
        if key_text == "It does not appear":
            _fail(rid, "answer", "localization key can never be the absence filler")
        if kind == "localization_exist":
            parts = [p.strip() for p in key_text.split(",")]
        else:
            if not key_text.endswith(" frame"):
                _fail(rid, "answer", f"localization key {key_text!r} not an ordinal frame")
            parts = [key_text[: -len(" frame")]]
        for part in parts:
            digits = "".join(ch for ch in part if ch.isdigit())
            if not digits or not (1 <= int(digits) <= m):
                _fail(rid, "answer", f"ordinal {part!r} outside 1..{m}")


def _check_permutation_meta(rid: str, rec: dict) -> None:
    mapping = rec["meta"].get("permutation")
    if mapping is None:
        return
    presented = rec["presented_indices"]
    if sorted(mapping) != list(range(len(presented))):
        _fail(rid, "meta.permutation", f"{mapping} is not a permutation")
    perm = Permutation(tuple(mapping))
    if apply_permutation(perm, sorted(presented)) != list(presented):
        _fail(rid, "meta.permutation", f"{mapping} does not reproduce presentation order")


def validate_record(
    rec: dict,
    dataset_seed: Optional[int],
    stripped: bool,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
) -> None:
    if not isinstance(rec, dict):
        raise ValidationError(f"record is not an object: {rec!r}")
    rid = rec.get("id")
    if not isinstance(rid, str) or not rid:
        raise ValidationError(f"record {rec!r}: id: missing or empty")
    required = ["kind", "video_id", "frame_refs", "presented_indices",
                "question", "options", "meta", "generator_version", "dataset_seed"]
    if not stripped:
        required.append("answer")
    for fieldname in required:
        if fieldname not in rec:
            _fail(rid, fieldname, "missing")
    kind = rec["kind"]
    if kind not in OPTION_CARDINALITY:
        _fail(rid, "kind", f"unknown kind {kind!r}")
    if not isinstance(rec["video_id"], str) or not rec["video_id"]:
        _fail(rid, "video_id", "must be a nonempty string")
    presented = rec["presented_indices"]
    if (not isinstance(presented, list) or not presented
            or not all(isinstance(i, int) and i >= 0 for i in presented)):
        _fail(rid, "presented_indices", "must be a nonempty list of indices >= 0")
    refs = rec["frame_refs"]
    if (not isinstance(refs, list)
            or not all(isinstance(r, str) and r for r in refs)):
        _fail(rid, "frame_refs", "must be a list of nonempty paths")
    if len(refs) != len(presented):
        _fail(rid, "frame_refs", f"{len(refs)} refs for {len(presented)} presented frames")
    if rec["question"] not in templates.get(kind, ()):
        _fail(rid, "question", f"not in the {kind} template bank: {rec['question']!r}")
    _check_options(rid, rec)
    meta = rec["meta"]
    if not isinstance(meta, dict):
        _fail(rid, "meta", "must be an object")
    if kind != "speed":
        m = meta.get("m")
        if not isinstance(m, int) or not (2 <= m <= 8):
            _fail(rid, "meta.m", f"fragment size must be an int in [2, 8], got {m!r}")
        expected_len = 2 if kind == "consistency" else m
        if len(presented) != expected_len:
            _fail(rid, "presented_indices", f"{kind} expects {expected_len} frames, got {len(presented)}")
    if kind in _STRICT_KINDS:
        if any(b <= a for a, b in zip(presented, presented[1:])):
            _fail(rid, "presented_indices", f"{kind} must be strictly chronological: {presented}")
    elif kind in _NONDECREASING_KINDS:
        if any(b < a for a, b in zip(presented, presented[1:])):
            _fail(rid, "presented_indices", f"{kind} must be nondecreasing: {presented}")
    elif kind in _SHUFFLED_KINDS:
        if len(set(presented)) != len(presented):
            _fail(rid, "presented_indices", f"{kind} indices must be distinct: {presented}")
    if not isinstance(rec["generator_version"], str) or not rec["generator_version"]:
        _fail(rid, "generator_version", "must be a nonempty string")
    if not isinstance(rec["dataset_seed"], int):
        _fail(rid, "dataset_seed", "must be an integer")
    if dataset_seed is not None and rec["dataset_seed"] != dataset_seed:
        _fail(rid, "dataset_seed", f"{rec['dataset_seed']} != manifest seed {dataset_seed}")
    if not stripped:
        answer = rec["answer"]
        if answer not in {o["label"] for o in rec["options"]}:
            _fail(rid, "answer", f"label {answer!r} not among options")
        _check_semantics(rid, rec)
        _check_permutation_meta(rid, rec)


def _read_jsonl(path: Path) -> list[dict]:
    if not path.is_file():
        raise ValidationError(f"missing dataset file {path}")
    records = []
    for line_num, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            raise ValidationError(f"{path}:{line_num}: blank line")
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{line_num}: invalid JSON: {exc}") from exc
    return records


def load_manifest_file(root: Path) -> dict:
    path = root / MANIFEST_FILE
    if not path.is_file():
        raise ValidationError(f"missing manifest {path}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    for fieldname in ("version", "dataset_seed", "counts", "videos", "skips"):
        if fieldname not in manifest:
            raise ValidationError(f"manifest: {fieldname}: missing")
    if not isinstance(manifest["counts"], dict):
        raise ValidationError("manifest: counts: must be an object")
    return manifest


def load_and_validate(
    root: str | Path,
    templates: dict[str, tuple[str, ...]] = DEFAULT_TEMPLATES,
    check_refs: bool = True,
) -> tuple[list[dict], dict]:
    """Load a dataset directory, enforcing every record and manifest invariant."""
    root = Path(root)
    manifest = load_manifest_file(root)
    stripped = bool(manifest.get("stripped", False))
    records = _read_jsonl(root / (QUERY_FILE if stripped else DATA_FILE))
    seed = manifest["dataset_seed"]
    seen_ids = set()
    counts: dict[str, int] = {}
    for rec in records:
        validate_record(rec, seed, stripped, templates)
        rid = rec["id"]
        if rid in seen_ids:
            raise ValidationError(f"record {rid}: id: duplicate")
        seen_ids.add(rid)
        counts[rec["kind"]] = counts.get(rec["kind"], 0) + 1
        if check_refs:
            for ref in rec["frame_refs"]:
                if not (root / ref).exists():
                    _fail(rid, "frame_refs", f"unresolvable path {ref!r}")
    if counts != {k: v for k, v in manifest["counts"].items() if v}:
        raise ValidationError(
            f"manifest counts {manifest['counts']} != observed {counts}"
        )
    if sum(manifest["counts"].values()) != len(records):
        raise ValidationError("manifest counts do not sum to the record count")
    if stripped:
        keys = _read_jsonl(root / KEY_FILE)
        key_ids = set()
        for entry in keys:
            if set(entry) != {"id", "answer"}:
                raise ValidationError(f"key file entry malformed: {entry!r}")
            key_ids.add(entry["id"])
        if key_ids != seen_ids:
            raise ValidationError("key file ids do not match the query file")
    return records, manifest


def load_for_scoring(root: str | Path, **kwargs) -> tuple[list[dict], dict]:
    """Like load_and_validate, but merges the key file back in for stripped sets."""
    root = Path(root)
    records, manifest = load_and_validate(root, **kwargs)
    if manifest.get("stripped"):
        answers = {e["id"]: e["answer"] for e in _read_jsonl(root / KEY_FILE)}
        for rec in records:
            rec["answer"] = answers[rec["id"]]
    return records, manifest
