"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line with the measured quantities."""

import json
import time

import numpy as np
import pytest

from fragqa.augment import speed_labels, speed_transform
from fragqa.cli import main
from fragqa.core import RngKey
from fragqa.dataset import DATA_FILE, MANIFEST_FILE, load_and_validate
from fragqa.errors import ValidationError
from fragqa.evalkit import random_baseline
from fragqa.ingest import Frame, FrameSequence, FixtureSpec, synthesize_fixture
from fragqa.sampler import STRATEGIES, motion_profile, sample_fragment
from fragqa.taskgen import gen_consistency
from fragqa.sampler import Fragment

from mutations import mutate, write_raw_dataset
from synth import records_for, synth_instances

FOUR_OPTION_KINDS = ("counting", "localization_first", "localization_last",
                     "localization_exist", "rearrangement", "speed")
THREE_OPTION_KINDS = ("consistency", "adjust_or_not")


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" — {detail}" if detail else ""))


def test_random_baseline_reproduction():
    """>=10k instances per kind; uniform responders hit 25.00/33.33 +-1.0pp; <10s."""
    started = time.perf_counter()
    records = []
    for kind in FOUR_OPTION_KINDS + THREE_OPTION_KINDS:
        records += records_for(synth_instances(kind, 10_000))
    baseline = random_baseline(records, 3, RngKey(0, "", "evalkit.baseline", 0))
    per_kind = {}
    for kind in FOUR_OPTION_KINDS + THREE_OPTION_KINDS:
        n = sum(c[0] for (k, _), c in baseline.monte_carlo.cells.items() if k == kind)
        correct = sum(c[1] for (k, _), c in baseline.monte_carlo.cells.items() if k == kind)
        per_kind[kind] = 100.0 * correct / n
    elapsed = time.perf_counter() - started
    ok = elapsed < 10.0
    for kind in FOUR_OPTION_KINDS:
        ok &= abs(per_kind[kind] - 25.00) <= 1.0
    for kind in THREE_OPTION_KINDS:
        ok &= abs(per_kind[kind] - 100 / 3) <= 1.0
    detail = ", ".join(f"{k}={v:.2f}" for k, v in per_kind.items()) + f", {elapsed:.1f}s"
    _report("random-baseline reproduction", ok, detail)
    assert ok, detail
    for kind in FOUR_OPTION_KINDS:
        assert baseline.analytic[kind] == 25.0
    for kind in THREE_OPTION_KINDS:
        assert round(baseline.analytic[kind], 2) == 33.33


def test_rearrangement_soundness():
    """Key permutation restores chronological order on 100% of 1,000 instances."""
    instances = synth_instances("rearrangement", 1_000)
    sound = 0
    for inst in instances:
        mapping = [int(v) - 1 for v in inst.option_set.key_text().split(",")]
        restored = [inst.presented_indices[j] for j in mapping]
        sound += restored == sorted(inst.presented_indices) and all(
            b > a for a, b in zip(restored, restored[1:])
        )
    ok = sound == len(instances)
    _report("rearrangement soundness", ok, f"{sound}/{len(instances)} strictly increasing")
    assert ok


def _concentration_profile(rho, frame_count=31, total=1000):
    transitions = frame_count - 1
    last = transitions // 3
    first = transitions - last
    last_mass = int(rho * total) // last
    first_mass = (total - last_mass * last) // first
    schedule = [first_mass] * first + [last_mass] * last
    spec = FixtureSpec(video_id="conc", frame_count=frame_count,
                       motion_schedule=tuple(schedule))
    seq, _, _ = synthesize_fixture(spec, RngKey(5, "conc", "fixture", 0))
    return motion_profile(seq), first, frame_count


def test_sampler_concentration():
    """Mass-weighted index share in the final third within 3 sigma; degenerate
    fixtures reproduce uniform output; deterministic midpoints hit [2, 5, 8]."""
    profile, boundary_transitions, frame_count = _concentration_profile(0.9)
    boundary = profile.cdf[boundary_transitions - 1]
    m, n_draws = 3, 5_000
    probs = []
    for i in range(m):
        lo, hi = i / m, (i + 1) / m
        probs.append(max(0.0, hi - max(lo, boundary)) / (hi - lo))
    expected = sum(probs) / m
    hits = 0
    first_frame_of_third = boundary_transitions + 1
    for i in range(n_draws):
        frag = sample_fragment(profile, frame_count, m, "motion_salient",
                               RngKey(1, "conc", "s", i))
        hits += sum(1 for idx in frag.indices if idx >= first_frame_of_third)
    mc = hits / (n_draws * m)
    sigma = (sum(p * (1 - p) for p in probs) / (m * m) / n_draws) ** 0.5
    ok = abs(mc - expected) <= 3 * sigma

    flat_spec = FixtureSpec(video_id="flat", frame_count=10, motion_schedule=(0,) * 9)
    flat_seq, _, _ = synthesize_fixture(flat_spec, RngKey(2, "flat", "fixture", 0))
    flat = motion_profile(flat_seq)
    uniform = sample_fragment(flat, 10, 4, "uniform", RngKey(0, "flat", "s", 0)).indices
    degenerate_ok = all(
        sample_fragment(flat, 10, 4, strategy, RngKey(3, "flat", "s", 1)).indices == uniform
        for strategy in STRATEGIES
    )

    even_spec = FixtureSpec(video_id="even", frame_count=10, motion_schedule=(50,) * 9)
    even_seq, _, _ = synthesize_fixture(even_spec, RngKey(4, "even", "fixture", 0))
    midpoint = sample_fragment(motion_profile(even_seq), 10, 3, "motion_salient",
                               RngKey(0, "even", "s", 0), midpoints=True).indices
    midpoint_ok = midpoint == (2, 5, 8)

    ok = ok and degenerate_ok and midpoint_ok
    _report("sampler concentration", ok,
            f"mc={mc:.4f} expected={expected:.4f} (3σ={3 * sigma:.4f}), "
            f"degenerate fallback={degenerate_ok}, midpoints={midpoint}")
    assert ok


def test_full_pipeline_determinism_across_worker_counts(corpus, tmp_path):
    """Worker counts 1 and 8 produce byte-identical dataset and manifest files."""
    out = tmp_path / "determinism"
    base = ["generate", "--manifest", str(corpus / "manifest.json"),
            "--out", str(out), "--seed", "23"]
    assert main(base + ["--workers", "1"]) == 0
    first = ((out / DATA_FILE).read_bytes(), (out / MANIFEST_FILE).read_bytes())
    assert main(base + ["--workers", "8"]) == 0
    second = ((out / DATA_FILE).read_bytes(), (out / MANIFEST_FILE).read_bytes())
    ok = first == second
    _report("pipeline determinism (workers 1 vs 8)", ok,
            f"{len(first[0])} data bytes compared")
    assert ok


def test_speed_augmentation():
    """fast(2): 60 -> 30 frames; slow then fast restores; no_speed is motionless."""
    frames = tuple(
        Frame(index=i, pixels=np.full((8, 8), i % 256, dtype=np.uint8),
              source_path=f"v/{i:03d}.png")
        for i in range(60)
    )
    seq = FrameSequence(video_id="v", frames=frames)
    labels = speed_labels()

    fast = speed_transform(seq, labels["fast"])
    fast_ok = len(fast) == 30 and [int(f.pixels[0, 0]) for f in fast.frames] == list(range(0, 60, 2))

    restored = speed_transform(speed_transform(seq, labels["slow"]), labels["fast"])
    restore_ok = len(restored) == 60 and all(
        np.array_equal(a.pixels, b.pixels) for a, b in zip(seq.frames, restored.frames)
    )

    frozen = speed_transform(seq, labels["no_speed"])
    frozen_profile = motion_profile(frozen)
    frozen_ok = frozen_profile.degenerate and all(m == 0 for m in frozen_profile.magnitudes)

    ok = fast_ok and restore_ok and frozen_ok
    _report("speed augmentation", ok,
            f"fast={fast_ok}, slow∘fast identity={restore_ok}, frozen degenerate={frozen_ok}")
    assert ok


def test_temporal_span_modes(corpus, tmp_path):
    """adjacent -> all distinct pairs at position distance 1; nonadjacent -> >= 2."""
    distances = {"adjacent": set(), "nonadjacent": set()}
    indices = (2, 4, 7, 11, 12)
    frag = Fragment(video_id="v", indices=indices, strategy="random", set_id=0)
    for mode in distances:
        for i in range(1_000):
            inst = gen_consistency(frag, mode, 0.5, RngKey(0, "v", "consistency", i))
            a, b = inst.presented_indices
            if a == b:
                continue
            pos = [indices.index(v) for v in (a, b)]
            distances[mode].add(abs(pos[1] - pos[0]))
    generator_ok = distances["adjacent"] == {1} and all(d >= 2 for d in distances["nonadjacent"])

    # end-to-end: positions recovered by joining consistency records to their
    # fragment's counting record via meta.fragment_id
    e2e_ok = True
    for mode, check in (("adjacent", lambda d: d == 1), ("nonadjacent", lambda d: d >= 2)):
        out = tmp_path / f"span_{mode}"
        assert main(["generate", "--manifest", str(corpus / "manifest.json"),
                     "--out", str(out), "--seed", "31", "--range-mode", mode]) == 0
        records = [json.loads(line) for line in (out / DATA_FILE).read_text().splitlines()]
        fragments = {r["meta"]["fragment_id"]: r["presented_indices"]
                     for r in records if r["kind"] == "counting"}
        for rec in records:
            if rec["kind"] != "consistency":
                continue
            a, b = rec["presented_indices"]
            if a == b:
                continue
            frag_indices = fragments[rec["meta"]["fragment_id"]]
            distance = abs(frag_indices.index(b) - frag_indices.index(a))
            e2e_ok &= check(distance)
    ok = generator_ok and e2e_ok
    _report("temporal-span modes", ok,
            f"generator distances adjacent={sorted(distances['adjacent'])}, "
            f"nonadjacent>=2 ok={all(d >= 2 for d in distances['nonadjacent'])}, e2e={e2e_ok}")
    assert ok


def test_paper_configuration_composition(dataset_dir):
    """Defaults: N=3 fragments of 3..5 frames; 18 records with a sidecar, 15 without."""
    records, _ = load_and_validate(dataset_dir)
    per_video: dict[str, list[dict]] = {}
    for rec in records:
        per_video.setdefault(rec["video_id"], []).append(rec)
    with_sidecar = len(per_video["sidecar_all"])
    without = len(per_video["plain"])
    fragment_ids = {r["meta"]["fragment_id"] for r in per_video["sidecar_all"]
                    if r["kind"] != "speed"}
    sizes = {r["meta"]["m"] for r in records if r["kind"] != "speed"}
    ok = (with_sidecar == 18 and without == 15 and len(fragment_ids) == 3
          and sizes <= {3, 4, 5})
    _report("paper-configuration composition", ok,
            f"sidecar=18? {with_sidecar}, plain=15? {without}, "
            f"fragments per video={len(fragment_ids)}, sizes={sorted(sizes)}")
    assert ok


def test_validation_fuzz_1000_mutations(dataset_dir, workspace):
    """1,000 invariant-breaking single-field mutations are each rejected."""
    records, manifest = load_and_validate(dataset_dir)
    rng = np.random.default_rng(12)
    mutant = workspace / "fuzz_mutant"
    rejected = 0
    failures: list[str] = []
    for i in range(1_000):
        broken_records, broken_manifest, description = mutate(records, manifest, rng)
        write_raw_dataset(broken_records, broken_manifest, mutant)
        try:
            load_and_validate(mutant)
            failures.append(f"#{i} {description}")
        except ValidationError:
            rejected += 1
    ok = rejected == 1_000
    _report("validation fuzz", ok, f"{rejected}/1000 rejected"
            + (f"; accepted: {failures[:3]}" if failures else ""))
    assert ok, failures[:10]
