"""Permutation algebra and keyed deterministic random streams.

Every random decision anywhere in the pipeline draws from a stream derived
from an :class:`RngKey`, so generation order, thread count and platform can
never change the output. Python's built-in ``hash()`` is salted per process
and is never used for seeding.

Permutation convention: applying ``p`` to a sequence ``s`` yields
``presented[i] = s[p[i]]`` ("which source goes to slot i"). Under this
convention the permutation that restores a shuffled presentation to
chronological order is exactly ``invert_permutation(p)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np

T = TypeVar("T")

MIN_PERM_SIZE = 2
MAX_PERM_SIZE = 8  # fragment sizes only


@dataclass(frozen=True)
class RngKey:
    """Identity of one random stream: same key, same draws, on any machine.

    ``task_kind`` is a task name for task streams and a dotted label
    (e.g. ``"sampler.plan"``) for plumbing streams.
    """

    dataset_seed: int
    video_id: str
    task_kind: str
    instance_index: int

    def canonical(self) -> str:
        return f"{self.dataset_seed}|{self.video_id}|{self.task_kind}|{self.instance_index}"

    def digest(self) -> bytes:
        return hashlib.sha256(self.canonical().encode("utf-8")).digest()

    def stream(self) -> np.random.Generator:
        seed = int.from_bytes(self.digest()[:16], "big")
        return np.random.Generator(np.random.PCG64(seed))

    def instance_id(self) -> str:
        """Stable 64-bit hex id for the task instance generated under this key."""
        return self.digest().hex()[:16]


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0..m-1} with 2 <= m <= 8."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.mapping)
        if not (MIN_PERM_SIZE <= m <= MAX_PERM_SIZE):
            raise ValueError(f"permutation size {m} outside [{MIN_PERM_SIZE}, {MAX_PERM_SIZE}]")
        if sorted(self.mapping) != list(range(m)):
            raise ValueError(f"mapping {self.mapping!r} is not a bijection on 0..{m - 1}")

    @property
    def size(self) -> int:
        return len(self.mapping)

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.mapping))


def apply_permutation(p: Permutation, s: Sequence[T]) -> list[T]:
    """Return the presented order: ``result[i] = s[p.mapping[i]]``."""
    if len(s) != p.size:
        raise ValueError(f"sequence length {len(s)} != permutation size {p.size}")
    return [s[j] for j in p.mapping]


def invert_permutation(p: Permutation) -> Permutation:
    """The permutation q with ``apply(q, apply(p, s)) == s`` for every s."""
    inverse = [0] * p.size
    for i, j in enumerate(p.mapping):
        inverse[j] = i
    return Permutation(tuple(inverse))


def random_permutation(
    m: int,
    exclude_identity: bool = False,
    key: RngKey | np.random.Generator | None = None,
) -> Permutation:
    """Draw a uniform permutation of size m from the key's stream.

    With ``exclude_identity`` the identity is rejected for up to 64 redraws;
    after that the first two positions of the last draw are swapped, which
    bounds the worst case while staying deterministic.
    """
    if m < MIN_PERM_SIZE:
        raise ValueError(f"m must be >= {MIN_PERM_SIZE}, got {m}")
    if key is None:
        raise ValueError("an RngKey or generator is required")
    rng = key.stream() if isinstance(key, RngKey) else key
    identity = tuple(range(m))
    mapping = identity
    for _ in range(64):
        mapping = tuple(rng.permutation(m).tolist())
        if not exclude_identity or mapping != identity:
            return Permutation(mapping)
    swapped = list(mapping)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    return Permutation(tuple(swapped))
