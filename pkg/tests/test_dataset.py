"""Serialization determinism, round trips, and the validating loader."""

import json

import numpy as np
import pytest

from fragqa.dataset import (
    DATA_FILE,
    KEY_FILE,
    MANIFEST_FILE,
    QUERY_FILE,
    build_manifest,
    emit,
    load_and_validate,
    load_for_scoring,
)
from fragqa.errors import EmitError, ValidationError

from mutations import mutate, write_raw_dataset


def test_round_trip_identity(dataset_dir):
    records, manifest = load_and_validate(dataset_dir)
    raw = [json.loads(line) for line in
           (dataset_dir / DATA_FILE).read_text().splitlines()]
    assert records == raw
    assert sum(manifest["counts"].values()) == len(records)


def test_emit_sorts_by_id_and_is_byte_stable(dataset_dir, tmp_path):
    records, manifest = load_and_validate(dataset_dir)
    first = emit(records, manifest, tmp_path / "a")
    second = emit(list(reversed(records)), manifest, tmp_path / "a")
    assert first["data"].read_bytes() == second["data"].read_bytes()
    ids = [json.loads(line)["id"] for line in first["data"].read_text().splitlines()]
    assert ids == sorted(ids)


def test_emit_empty_records(tmp_path):
    manifest = build_manifest(0, [], [], [])
    written = emit([], manifest, tmp_path)
    assert written["data"].read_text() == ""
    records, loaded = load_and_validate(tmp_path)
    assert records == []
    assert loaded["counts"] == {}


def test_emit_rejects_duplicate_ids(dataset_dir, tmp_path):
    records, manifest = load_and_validate(dataset_dir)
    records = records + [records[0]]
    with pytest.raises(EmitError, match="duplicate"):
        emit(records, manifest, tmp_path)


def test_strip_answers_layout(stripped_dataset_dir):
    root = stripped_dataset_dir
    assert (root / QUERY_FILE).is_file()
    assert (root / KEY_FILE).is_file()
    assert not (root / DATA_FILE).exists()
    for line in (root / QUERY_FILE).read_text().splitlines():
        rec = json.loads(line)
        assert "answer" not in rec
        assert "permutation" not in rec["meta"]
        assert "speed_label" not in rec["meta"]
    for line in (root / KEY_FILE).read_text().splitlines():
        assert set(json.loads(line)) == {"id", "answer"}


def test_stripped_dataset_validates_and_merges_for_scoring(stripped_dataset_dir):
    records, manifest = load_and_validate(stripped_dataset_dir)
    assert manifest["stripped"] is True
    assert all("answer" not in rec for rec in records)
    merged, _ = load_for_scoring(stripped_dataset_dir)
    assert all(rec["answer"] in "ABCD" for rec in merged)


def test_stripped_and_full_datasets_agree(dataset_dir, stripped_dataset_dir):
    full, _ = load_and_validate(dataset_dir)
    merged, _ = load_for_scoring(stripped_dataset_dir)
    by_id = {rec["id"]: rec for rec in full}
    assert len(merged) == len(full)
    for rec in merged:
        assert rec["answer"] == by_id[rec["id"]]["answer"]
        assert rec["question"] == by_id[rec["id"]]["question"]


def test_validation_names_record_and_field(dataset_dir, workspace):
    records, manifest = load_and_validate(dataset_dir)
    broken = [json.loads(json.dumps(r)) for r in records]
    broken[3]["options"][1]["label"] = "A"
    mutant = workspace / "mutant_named"
    write_raw_dataset(broken, manifest, mutant)
    with pytest.raises(ValidationError) as err:
        load_and_validate(mutant)
    assert broken[3]["id"] in str(err.value)
    assert "options" in str(err.value)


def test_manifest_count_mismatch_rejected(dataset_dir, workspace):
    records, manifest = load_and_validate(dataset_dir)
    bad = json.loads(json.dumps(manifest))
    kind = sorted(bad["counts"])[0]
    bad["counts"][kind] += 1
    mutant = workspace / "mutant_counts"
    write_raw_dataset(records, bad, mutant)
    with pytest.raises(ValidationError, match="count"):
        load_and_validate(mutant)


def test_unresolvable_frame_ref_rejected(dataset_dir, workspace):
    records, manifest = load_and_validate(dataset_dir)
    broken = [json.loads(json.dumps(r)) for r in records]
    broken[0]["frame_refs"][0] = "nowhere/missing.png"
    mutant = workspace / "mutant_refs"
    write_raw_dataset(broken, manifest, mutant)
    with pytest.raises(ValidationError, match="unresolvable"):
        load_and_validate(mutant)


def test_mutation_catalog_sample(dataset_dir, workspace):
    # a quick 60-mutation pass; the acceptance suite runs the full 1,000
    records, manifest = load_and_validate(dataset_dir)
    rng = np.random.default_rng(5)
    mutant = workspace / "mutant_sample"
    for i in range(60):
        broken_records, broken_manifest, description = mutate(records, manifest, rng)
        write_raw_dataset(broken_records, broken_manifest, mutant)
        with pytest.raises(ValidationError):
            load_and_validate(mutant)
    # the pristine copy still validates after all that
    write_raw_dataset(records, manifest, mutant)
    load_and_validate(mutant)


def test_missing_manifest_rejected(tmp_path):
    with pytest.raises(ValidationError, match="manifest"):
        load_and_validate(tmp_path)


def test_blank_line_rejected(dataset_dir, workspace):
    records, manifest = load_and_validate(dataset_dir)
    mutant = workspace / "mutant_blank"
    write_raw_dataset(records, manifest, mutant)
    data = mutant / DATA_FILE
    lines = data.read_text().splitlines()
    lines.insert(1, "")
    data.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="blank"):
        load_and_validate(mutant)
