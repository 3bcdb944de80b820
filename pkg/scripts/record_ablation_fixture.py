#!/usr/bin/env python3
"""Regenerate the pinned ablation regression CSV under tests/data/.

The acceptance suite reruns the exact same toy-gen + ablate pipeline in
a fresh directory and compares bytes against the recorded file, so this
script is the single source of truth for the regression values. Rerun it
(and commit the result) only when a deliberate change to the fixture or
the report format invalidates the recording.
"""

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from acceptance_pipeline import run_fixture_pipeline  # noqa: E402


def main() -> int:
    data_dir = REPO / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        csv_bytes, means = run_fixture_pipeline(Path(tmp))
    target = data_dir / "fixture_ablation.csv"
    target.write_bytes(csv_bytes)
    print(f"recorded {target} ({len(csv_bytes)} bytes)")
    for layer, mean in means.items():
        print(f"  {layer:<10} {mean:.4f}")
    print(f"ensemble - out margin: {means['ensemble'] - means['out']:+.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
