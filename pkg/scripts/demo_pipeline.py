#!/usr/bin/env python3
"""End-to-end demo: synthesize a fixture corpus, generate a task dataset,
replay the answer keys as responses, and print the score report.

Usage: python3 scripts/demo_pipeline.py [workdir]
"""

import json
import sys
import tempfile
from pathlib import Path

from fragqa.cli import main
from fragqa.dataset import DATA_FILE, load_and_validate
from fragqa.evalkit import render_report, score_run

SPEC = {
    "seed": 7,
    "videos": [
        {"video_id": "marked", "frame_count": 24, "width": 48, "height": 32,
         "marker_schedule": [i >= 6 for i in range(24)],
         "motion_schedule": 150, "target": "marker"},
        {"video_id": "plain", "frame_count": 18, "width": 48, "height": 32,
         "motion_schedule": 90},
        {"video_id": "static", "frame_count": 12, "width": 48, "height": 32,
         "motion_schedule": 0},
    ],
}


def run(workdir: Path) -> None:
    spec_path = workdir / "fixture_spec.json"
    spec_path.write_text(json.dumps(SPEC, indent=2))
    corpus = workdir / "corpus"
    dataset = workdir / "dataset"
    assert main(["fixture", "--spec", str(spec_path), "--out", str(corpus)]) == 0
    assert main(["generate", "--manifest", str(corpus / "manifest.json"),
                 "--out", str(dataset), "--seed", "42"]) == 0
    assert main(["validate", "--data", str(dataset)]) == 0

    records, manifest = load_and_validate(dataset)
    responses = [{"id": r["id"], "response_text": r["answer"]} for r in records]
    print(f"\nskip log: {manifest['skips']}")
    print("\nscoring the answer keys against themselves:\n")
    print(render_report(score_run(records, responses), "markdown"))
    print(f"dataset: {dataset / DATA_FILE}")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        target = Path(sys.argv[1])
        target.mkdir(parents=True, exist_ok=True)
        run(target)
    else:
        with tempfile.TemporaryDirectory(prefix="fragqa_demo_") as tmp:
            run(Path(tmp))
