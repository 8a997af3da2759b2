"""Permutation algebra and keyed-stream determinism."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragqa.core import (
    Permutation,
    RngKey,
    apply_permutation,
    invert_permutation,
    random_permutation,
)


def test_apply_identity():
    p = Permutation((0, 1, 2))
    assert apply_permutation(p, ["f0", "f1", "f2"]) == ["f0", "f1", "f2"]


def test_apply_rotation():
    p = Permutation((2, 0, 1))
    assert apply_permutation(p, ["f0", "f1", "f2"]) == ["f2", "f0", "f1"]


def test_apply_length_mismatch():
    with pytest.raises(ValueError):
        apply_permutation(Permutation((0, 1, 2)), [1, 2])


def test_apply_preserves_multiset_all_m4():
    # brute force over all 24 permutations
    s = [0, 1, 2, 3]
    for mapping in itertools.permutations(range(4)):
        assert sorted(apply_permutation(Permutation(mapping), s)) == s


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))
    with pytest.raises(ValueError):
        Permutation((1,))
    with pytest.raises(ValueError):
        Permutation(tuple(range(9)))


def test_invert_identity():
    assert invert_permutation(Permutation((0, 1, 2))).mapping == (0, 1, 2)


def test_invert_example_against_search():
    # independent oracle: search all 3! candidates for the true inverse
    p = Permutation((2, 0, 1))
    s = ["a", "b", "c"]
    shuffled = apply_permutation(p, s)
    winners = [
        q for q in itertools.permutations(range(3))
        if apply_permutation(Permutation(q), shuffled) == s
    ]
    assert winners == [(1, 2, 0)]
    assert invert_permutation(p).mapping == (1, 2, 0)


def test_invert_involution_exhaustive():
    for m in range(2, 6):
        for mapping in itertools.permutations(range(m)):
            p = Permutation(mapping)
            assert invert_permutation(invert_permutation(p)).mapping == mapping


def test_apply_invert_roundtrip_exhaustive():
    for m in range(2, 6):
        s = [f"x{i}" for i in range(m)]
        for mapping in itertools.permutations(range(m)):
            p = Permutation(mapping)
            assert apply_permutation(invert_permutation(p), apply_permutation(p, s)) == s


@settings(deadline=None)
@given(st.integers(2, 8).flatmap(lambda m: st.permutations(list(range(m)))))
def test_roundtrip_property(mapping):
    p = Permutation(tuple(mapping))
    s = list(range(len(mapping)))
    assert apply_permutation(invert_permutation(p), apply_permutation(p, s)) == s


def test_random_permutation_m2_exclude_identity():
    key = RngKey(0, "v", "t", 0)
    assert random_permutation(2, exclude_identity=True, key=key).mapping == (1, 0)


def test_random_permutation_deterministic():
    key = RngKey(5, "vid", "rearrangement", 7)
    a = random_permutation(5, exclude_identity=True, key=key)
    b = random_permutation(5, exclude_identity=True, key=key)
    assert a.mapping == b.mapping


def test_random_permutation_rejects_small_m():
    with pytest.raises(ValueError):
        random_permutation(1, key=RngKey(0, "v", "t", 0))


def test_random_permutation_uniform_frequency():
    n = 10_000
    rng = RngKey(1, "freq", "t", 0).stream()
    counts: dict[tuple, int] = {}
    for _ in range(n):
        mapping = random_permutation(4, key=rng).mapping
        counts[mapping] = counts.get(mapping, 0) + 1
    assert len(counts) == 24
    p = 1 / 24
    bound = 3 * np.sqrt(n * p * (1 - p))
    for mapping, count in counts.items():
        assert abs(count - n * p) <= bound, (mapping, count)


def test_random_permutation_exclusion_never_identity():
    for m in (3, 4, 5):
        rng = RngKey(2, f"m{m}", "t", 0).stream()
        identity = tuple(range(m))
        for _ in range(10_000):
            assert random_permutation(m, exclude_identity=True, key=rng).mapping != identity


def test_rngkey_same_key_same_stream():
    key = RngKey(3, "vid", "counting", 4)
    a = key.stream().integers(0, 2**63, size=64)
    b = key.stream().integers(0, 2**63, size=64)
    assert np.array_equal(a, b)


def test_rngkey_single_field_changes_decorrelate_streams():
    base = RngKey(10, "video-7", "consistency", 3)
    variants = []
    for i in range(250):
        variants.append((RngKey(10 + i + 1, base.video_id, base.task_kind, 3), base))
        variants.append((RngKey(10, f"video-{i + 8}", base.task_kind, 3), base))
        variants.append((RngKey(10, base.video_id, f"kind{i}", 3), base))
        variants.append((RngKey(10, base.video_id, base.task_kind, 4 + i), base))
    assert len(variants) == 1000
    for changed, reference in variants:
        a = changed.stream().integers(0, 2**63, size=64)
        b = reference.stream().integers(0, 2**63, size=64)
        assert not np.array_equal(a, b), changed


def test_instance_id_stable_and_distinct():
    key = RngKey(0, "vid", "counting", 0)
    assert key.instance_id() == RngKey(0, "vid", "counting", 0).instance_id()
    assert key.instance_id() != RngKey(0, "vid", "counting", 1).instance_id()
    assert len(key.instance_id()) == 16
