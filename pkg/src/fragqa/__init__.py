"""Deterministic fragment-level video QA task generation and scoring."""

__version__ = "0.1.0"

from .core import Permutation, RngKey, apply_permutation, invert_permutation, random_permutation

__all__ = [
    "__version__",
    "Permutation",
    "RngKey",
    "apply_permutation",
    "invert_permutation",
    "random_permutation",
]
