#!/usr/bin/env python3
"""Simulate the six-level commercial tower for one virtual hour and export
both a whole-building map and a near-corner view-dependent map.

The full grid is 1,152 cells, which trips the polygon budget and downgrades
spheres to boxes; the near view keeps full detail only in rooms close to
the camera. Outputs land in out/commercial6/. Serve them with:

    python3 -m thermomap serve --store out/commercial6 --port 8000
"""

import sys
from pathlib import Path

from thermomap.cli import main

ROOT = Path(__file__).resolve().parent.parent
CONFIG = ROOT / "configs" / "commercial6.json"
OUT = ROOT / "out" / "commercial6"


def run() -> int:
    code = main(["simulate", "--config", str(CONFIG), "--out", str(OUT)])
    if code != 0:
        return code
    code = main(
        [
            "export-scene",
            "--store", str(OUT),
            "--viewpoint=-30,-30,20",
            "--out", str(OUT / "scene_overview.x3d"),
        ]
    )
    if code != 0:
        return code
    return main(
        [
            "export-scene",
            "--store", str(OUT),
            "--viewpoint=-0.7,-0.7,1.5",
            "--detail-radius", "1.5",
            "--out", str(OUT / "scene_corner_detail.x3d"),
        ]
    )


if __name__ == "__main__":
    sys.exit(run())
