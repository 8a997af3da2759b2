#!/usr/bin/env python3
"""Load and validate a dataset, then print its records as canonical JSON
(sorted keys, one per line, id order). Used as the reference output for
cross-implementation parity checks.

Usage: python3 scripts/dump_dataset.py <dataset-root>
"""

import json
import sys

from fragqa.dataset import load_and_validate


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    records, _ = load_and_validate(sys.argv[1])
    for rec in sorted(records, key=lambda r: r["id"]):
        print(json.dumps(rec, sort_keys=True, ensure_ascii=False, separators=(",", ":")))
    return 0


if __name__ == "__main__":
    sys.exit(main())
