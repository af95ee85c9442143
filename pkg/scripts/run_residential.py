#!/usr/bin/env python3
"""Simulate the four-room residential layout for one virtual hour, render
its final thermal map, and sweep the reconstruction-vs-truth validation.

Outputs land in out/residential/. Serve them afterwards with:

    python3 -m thermomap serve --store out/residential --port 8000
"""

import sys
from pathlib import Path

from thermomap.cli import main

ROOT = Path(__file__).resolve().parent.parent
CONFIG = ROOT / "configs" / "residential.json"
OUT = ROOT / "out" / "residential"


def run() -> int:
    code = main(["simulate", "--config", str(CONFIG), "--out", str(OUT)])
    if code != 0:
        return code
    code = main(
        [
            "export-scene",
            "--store", str(OUT),
            "--viewpoint=-6,-6,4",
            "--out", str(OUT / "scene_entry_view.x3d"),
        ]
    )
    if code != 0:
        return code
    return main(
        [
            "validate",
            "--config", str(ROOT / "configs" / "validation_box.json"),
            "--plane", "z=3",
            "--res", "128x128",
            "--spacings", "2,1,0.5",
            "--out", str(OUT / "validation_report.json"),
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
