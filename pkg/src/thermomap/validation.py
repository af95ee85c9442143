"""Numerical validation of reconstructed fields against ground truth.

In place of side-by-side thermography imagery, this module rasterizes a 2D
cross-section of both the reconstructed field and the generating truth,
then compares them: RMS error, max absolute error, and the offset between
their hottest pixels. Rasters export as 16-bit PGM plus a JSON metadata
sidecar so reports can be diffed bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from thermomap.field import (
    FieldScenario,
    ReconstructionField,
    ReconstructionMethod,
    SensorSample,
    ground_truth,
    reconstruct,
)
from thermomap.geometry import Room, Vec3

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class Plane:
    """An axis-aligned cutting plane, e.g. axis='z', offset=1.5."""

    axis: str
    offset: float

    def __post_init__(self) -> None:
        if self.axis not in _AXES:
            raise ValueError(f"plane axis must be one of x, y, z; got {self.axis!r}")

    @property
    def in_plane_axes(self) -> tuple[int, int]:
        """Indices of the two coordinate axes spanned by the raster (u, v)."""
        fixed = _AXES[self.axis]
        u, v = [i for i in range(3) if i != fixed]
        return u, v

    def point(self, u: float, v: float) -> Vec3:
        coords = [0.0, 0.0, 0.0]
        coords[_AXES[self.axis]] = self.offset
        ui, vi = self.in_plane_axes
        coords[ui] = u
        coords[vi] = v
        return (coords[0], coords[1], coords[2])


def parse_plane(text: str) -> Plane:
    """Parse 'z=1.5' style plane descriptions."""
    try:
        axis, offset = text.split("=", 1)
        return Plane(axis.strip().lower(), float(offset))
    except ValueError as exc:
        raise ValueError(f"cannot parse plane {text!r}; expected e.g. z=1.5") from exc


@dataclass(frozen=True)
class CrossSectionRaster:
    """Row-major (h, w) grid of field values over a rectangle in a plane."""

    plane: Plane
    extent: tuple[tuple[float, float], tuple[float, float]]  # (u0,u1), (v0,v1)
    values: np.ndarray  # shape (h, w)

    def __post_init__(self) -> None:
        h, w = self.values.shape
        if w < 2 or h < 2:
            raise ValueError(f"raster resolution must be at least 2x2, got {w}x{h}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("raster contains non-finite values")

    @property
    def resolution(self) -> tuple[int, int]:
        h, w = self.values.shape
        return w, h

    def pixel_point(self, i: int, j: int) -> Vec3:
        """3D position of pixel (row i, column j)."""
        (u0, u1), (v0, v1) = self.extent
        h, w = self.values.shape
        u = u0 + (u1 - u0) * j / (w - 1)
        v = v0 + (v1 - v0) * i / (h - 1)
        return self.plane.point(u, v)

    def argmax_uv(self) -> tuple[float, float]:
        """In-plane (u, v) coordinates of the hottest pixel."""
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        (u0, u1), (v0, v1) = self.extent
        h, w = self.values.shape
        return (u0 + (u1 - u0) * j / (w - 1), v0 + (v1 - v0) * i / (h - 1))


def cross_section(
    evaluator: Callable[[Vec3], float],
    plane: Plane,
    resolution: tuple[int, int],
    extent: tuple[tuple[float, float], tuple[float, float]],
) -> CrossSectionRaster:
    """Sample the evaluator on a regular pixel grid spanning the extent."""
    w, h = resolution
    if w < 2 or h < 2:
        raise ValueError(f"resolution must be at least 2x2, got {w}x{h}")
    (u0, u1), (v0, v1) = extent
    us = np.linspace(u0, u1, w)
    vs = np.linspace(v0, v1, h)
    values = np.empty((h, w), dtype=np.float64)
    for i, v in enumerate(vs):
        for j, u in enumerate(us):
            values[i, j] = evaluator(plane.point(float(u), float(v)))
    return CrossSectionRaster(plane=plane, extent=extent, values=values)


@dataclass(frozen=True)
class Tolerances:
    rms: float = 0.5  # deg C (or %RH on the humidity layer)
    hotspot_offset: float = 1.0  # meters; callers usually pass the cell spacing


@dataclass(frozen=True)
class ComparisonReport:
    rms_error: float
    max_abs_error: float
    hotspot_offset: float
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "rms_error": self.rms_error,
            "max_abs_error": self.max_abs_error,
            "hotspot_offset": self.hotspot_offset,
            "passed": self.passed,
        }


def compare(
    a: CrossSectionRaster, b: CrossSectionRaster, tolerances: Tolerances = Tolerances()
) -> ComparisonReport:
    """Error statistics between two rasters of the same plane and extent."""
    if a.values.shape != b.values.shape:
        raise ValueError(f"raster shapes differ: {a.values.shape} vs {b.values.shape}")
    if a.extent != b.extent:
        raise ValueError(f"raster extents differ: {a.extent} vs {b.extent}")
    diff = a.values - b.values
    rms = float(np.sqrt(np.mean(diff * diff)))
    max_abs = float(np.max(np.abs(diff)))
    offset = float(math.dist(a.argmax_uv(), b.argmax_uv()))
    return ComparisonReport(
        rms_error=rms,
        max_abs_error=max_abs,
        hotspot_offset=offset,
        passed=rms <= tolerances.rms and offset <= tolerances.hotspot_offset,
    )


def lattice_samples(
    room: Room, scenario: FieldScenario, spacing: float, t: float = 0.0
) -> list[tuple[Vec3, SensorSample]]:
    """Noise-free virtual sensors on a complete lattice spanning the room.

    Each axis gets max(2, floor(extent/spacing) + 1) stations, endpoints
    included, so the lattice hull covers the whole room at every density.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    axes = []
    for lo, hi in zip(room.min_corner, room.max_corner):
        n = max(2, int(math.floor((hi - lo) / spacing + 1e-9)) + 1)
        axes.append(np.linspace(lo, hi, n))
    samples = []
    counter = 0
    for z in axes[2]:
        for y in axes[1]:
            for x in axes[0]:
                p = (float(x), float(y), float(z))
                temp, rh = ground_truth(scenario, p, t)
                samples.append((p, SensorSample(f"v{counter:04d}", t, temp, rh)))
                counter += 1
    return samples


def reconstruction_error(
    room: Room,
    scenario: FieldScenario,
    spacing: float,
    plane: Plane,
    resolution: tuple[int, int],
    t: float = 0.0,
    tolerances: Tolerances = Tolerances(),
) -> ComparisonReport:
    """Rasterize reconstruction vs truth over the room slice and compare."""
    fld = ReconstructionField(
        method=ReconstructionMethod.LINEAR_GRID,
        samples=lattice_samples(room, scenario, spacing, t),
    )
    ui, vi = plane.in_plane_axes
    extent = (
        (room.min_corner[ui], room.max_corner[ui]),
        (room.min_corner[vi], room.max_corner[vi]),
    )
    recon = cross_section(lambda p: reconstruct(fld, p)[0], plane, resolution, extent)
    truth = cross_section(lambda p: ground_truth(scenario, p, t)[0], plane, resolution, extent)
    return compare(recon, truth, tolerances)


def write_pgm(raster: CrossSectionRaster, path: Path | str, lo: float, hi: float) -> None:
    """16-bit binary PGM plus a JSON sidecar describing the value mapping."""
    if hi <= lo:
        raise ValueError(f"invalid scale range [{lo}, {hi}]")
    path = Path(path)
    scaled = np.clip((raster.values - lo) / (hi - lo), 0.0, 1.0)
    pixels = (scaled * 65535.0).round().astype(">u2")
    h, w = raster.values.shape
    with path.open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())
    meta = {
        "plane": {"axis": raster.plane.axis, "offset": raster.plane.offset},
        "extent": [list(raster.extent[0]), list(raster.extent[1])],
        "resolution": [w, h],
        "scale": {"lo": lo, "hi": hi},
        "format": "P5 maxval=65535 big-endian",
    }
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def read_pgm(path: Path | str) -> np.ndarray:
    """Read back a 16-bit binary PGM written by write_pgm."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"65535":
        raise ValueError(f"{path}: not a 16-bit binary PGM from this tool")
    w, h = (int(tok) for tok in parts[1].split())
    pixels = np.frombuffer(parts[3], dtype=">u2", count=w * h)
    return pixels.reshape((h, w)).astype(np.float64) / 65535.0
