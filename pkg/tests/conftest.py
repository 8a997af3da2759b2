import json

import pytest

from fragqa.cli import main

# corpus layout: one marker-everywhere video (localization always possible),
# one plain video, one gappy-marker video, one static video
FIXTURE_SPEC = {
    "seed": 7,
    "videos": [
        {
            "video_id": "sidecar_all",
            "frame_count": 20,
            "width": 32,
            "height": 24,
            "marker_schedule": [True] * 20,
            "motion_schedule": 120,
            "target": "marker",
        },
        {
            "video_id": "plain",
            "frame_count": 16,
            "width": 32,
            "height": 24,
            "motion_schedule": 90,
        },
        {
            "video_id": "gappy",
            "frame_count": 18,
            "width": 32,
            "height": 24,
            "marker_schedule": [False, False, True, True, True, False, False, True, True,
                                False, False, False, True, True, True, True, False, False],
            "motion_schedule": 100,
            "target": "marker",
        },
        {
            "video_id": "static",
            "frame_count": 10,
            "width": 32,
            "height": 24,
            "motion_schedule": 0,
        },
    ],
}


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    return tmp_path_factory.mktemp("ws")


@pytest.fixture(scope="session")
def corpus(workspace):
    spec_path = workspace / "fixture_spec.json"
    spec_path.write_text(json.dumps(FIXTURE_SPEC), encoding="utf-8")
    assert main(["fixture", "--spec", str(spec_path), "--out", str(workspace / "fxt")]) == 0
    return workspace / "fxt"


@pytest.fixture(scope="session")
def dataset_dir(workspace, corpus):
    out = workspace / "out"
    rc = main([
        "generate",
        "--manifest", str(corpus / "manifest.json"),
        "--out", str(out),
        "--seed", "11",
    ])
    assert rc == 0
    return out


@pytest.fixture(scope="session")
def stripped_dataset_dir(workspace, corpus):
    out = workspace / "out_stripped"
    rc = main([
        "generate",
        "--manifest", str(corpus / "manifest.json"),
        "--out", str(out),
        "--seed", "11",
        "--strip-answers",
    ])
    assert rc == 0
    return out
