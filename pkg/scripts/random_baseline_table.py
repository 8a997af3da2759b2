#!/usr/bin/env python3
"""Reproduce the random-responder row: analytic chance accuracy per task kind
next to a Monte-Carlo estimate over a large synthetic instance corpus.

Usage: python3 scripts/random_baseline_table.py [--per-kind 10000] [--trials 3]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from synth import records_for, synth_instances  # noqa: E402

from fragqa.core import RngKey  # noqa: E402
from fragqa.evalkit import random_baseline, render_baseline  # noqa: E402
from fragqa.taskgen import KIND_ORDER  # noqa: E402


def run(per_kind: int, trials: int, seed: int) -> None:
    started = time.perf_counter()
    records = []
    for kind in KIND_ORDER:
        records += records_for(synth_instances(kind, per_kind))
    baseline = random_baseline(records, trials, RngKey(seed, "", "evalkit.baseline", 0))
    elapsed = time.perf_counter() - started
    print(render_baseline(baseline, "markdown"))
    print(f"{len(records)} instances, {trials} trials, {elapsed:.1f}s")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--per-kind", type=int, default=10_000)
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args.per_kind, args.trials, args.seed)
