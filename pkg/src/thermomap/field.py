"""Synthetic temperature/humidity fields and reconstruction from samples.

A FieldScenario drives the simulated building: a baseline plus Gaussian
hotspots with a switch-on/decay time envelope and an optional diurnal swing.
ReconstructionField answers field values at arbitrary points from discrete
sensor samples, either by trilinear interpolation on a rectangular sensor
lattice or by normalized Gaussian (bell) weighting for arbitrary layouts.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum

from .geometry import Vec3

# SHT11-class sensor limits; decoded samples must stay inside these.
TEMP_RANGE = (-40.0, 123.8)
RH_RANGE = (0.0, 100.0)

_LATTICE_TOL = 1e-6


class ExtrapolationError(ValueError):
    """Raised when a linear-grid query falls outside the sample hull."""


@dataclass(frozen=True)
class Hotspot:
    center: Vec3
    amplitude_temp: float = 0.0
    amplitude_rh: float = 0.0
    sigma: float = 1.0
    onset: float = 0.0
    decay: float = 0.0  # e-folding seconds after onset; 0 = persistent

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError(f"hotspot sigma must be positive, got {self.sigma}")

    def envelope(self, t: float) -> float:
        if t < self.onset:
            return 0.0
        if self.decay <= 0:
            return 1.0
        return math.exp(-(t - self.onset) / self.decay)


@dataclass(frozen=True)
class Diurnal:
    amplitude: float = 0.0
    period: float = 86400.0

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError(f"diurnal period must be positive, got {self.period}")


@dataclass(frozen=True)
class FieldScenario:
    baseline_temp: float = 20.0
    baseline_rh: float = 50.0
    hotspots: tuple[Hotspot, ...] = ()
    diurnal: Diurnal = Diurnal()


def ground_truth(scenario: FieldScenario, p: Vec3, t: float) -> tuple[float, float]:
    """Field value at point p and time t: (temperature °C, relative humidity %).

    Deterministic superposition: baseline + diurnal sine (temperature only)
    + per-hotspot Gaussian bumps scaled by their time envelope. RH is clamped
    to [0, 100] after superposition.
    """
    temp = scenario.baseline_temp
    if scenario.diurnal.amplitude:
        temp += scenario.diurnal.amplitude * math.sin(
            2 * math.pi * t / scenario.diurnal.period
        )
    rh = scenario.baseline_rh
    for h in scenario.hotspots:
        env = h.envelope(t)
        if env == 0.0:
            continue
        d2 = sum((p[a] - h.center[a]) ** 2 for a in range(3))
        g = math.exp(-d2 / (2 * h.sigma**2)) * env
        temp += h.amplitude_temp * g
        rh += h.amplitude_rh * g
    return temp, min(max(rh, RH_RANGE[0]), RH_RANGE[1])


@dataclass(frozen=True)
class SensorSample:
    sensor_id: str
    t: float
    temp: float
    rh: float
    seq: int | None = None

    def __post_init__(self) -> None:
        if not TEMP_RANGE[0] <= self.temp <= TEMP_RANGE[1]:
            raise ValueError(f"temp {self.temp} outside sensor range {TEMP_RANGE}")
        if not RH_RANGE[0] <= self.rh <= RH_RANGE[1]:
            raise ValueError(f"rh {self.rh} outside {RH_RANGE}")


class ReconstructionMethod(str, Enum):
    LINEAR_GRID = "linear_grid"
    BELL_KERNEL = "bell_kernel"


def _nearest_neighbor_spacing(positions: list[Vec3]) -> float:
    if len(positions) < 2:
        return 1.0
    total = 0.0
    for i, p in enumerate(positions):
        best = min(
            math.dist(p, q) for j, q in enumerate(positions) if j != i
        )
        total += best
    return total / len(positions)


def _lattice_axes(positions: list[Vec3]) -> tuple[list[float], list[float], list[float]]:
    axes: list[list[float]] = []
    for a in range(3):
        coords: list[float] = []
        for p in positions:
            if not any(abs(p[a] - c) <= _LATTICE_TOL for c in coords):
                coords.append(p[a])
        axes.append(sorted(coords))
    return axes[0], axes[1], axes[2]


def _axis_index(coords: list[float], v: float) -> int | None:
    for i, c in enumerate(coords):
        if abs(v - c) <= _LATTICE_TOL:
            return i
    return None


def is_complete_lattice(positions: list[Vec3]) -> bool:
    """True when the positions form a full rectangular grid (each axis-coord
    combination occupied exactly once)."""
    xs, ys, zs = _lattice_axes(positions)
    if len(xs) * len(ys) * len(zs) != len(positions):
        return False
    seen = set()
    for p in positions:
        key = (
            _axis_index(xs, p[0]),
            _axis_index(ys, p[1]),
            _axis_index(zs, p[2]),
        )
        if None in key or key in seen:
            return False
        seen.add(key)
    return True


@dataclass
class ReconstructionField:
    """Interpolator over (position, SensorSample) pairs.

    LINEAR_GRID requires a complete rectangular sample lattice and answers by
    trilinear interpolation; BELL_KERNEL accepts any layout and answers by
    normalized Gaussian weighting, snapping to a sample when the query is
    within snap_epsilon of it.
    """

    method: ReconstructionMethod
    samples: list[tuple[Vec3, SensorSample]]
    kernel_sigma: float | None = None
    snap_epsilon: float = 0.01

    _axes: tuple[list[float], list[float], list[float]] = field(init=False, repr=False)
    _grid: dict[tuple[int, int, int], tuple[float, float]] = field(
        init=False, repr=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("reconstruction needs at least one sample")
        positions = [p for p, _ in self.samples]
        if self.method is ReconstructionMethod.LINEAR_GRID:
            if not is_complete_lattice(positions):
                raise ValueError(
                    "linear_grid requires samples on a complete rectangular grid"
                )
            self._axes = _lattice_axes(positions)
            for p, s in self.samples:
                key = (
                    _axis_index(self._axes[0], p[0]),
                    _axis_index(self._axes[1], p[1]),
                    _axis_index(self._axes[2], p[2]),
                )
                self._grid[key] = (s.temp, s.rh)  # type: ignore[index]
        else:
            self._axes = ([], [], [])
            if self.kernel_sigma is None:
                self.kernel_sigma = _nearest_neighbor_spacing(positions) / 2

    def value_at(self, p: Vec3) -> tuple[float, float]:
        if self.method is ReconstructionMethod.LINEAR_GRID:
            return self._trilinear(p)
        return self._bell(p)

    def _axis_cell(self, coords: list[float], v: float) -> tuple[int, float]:
        lo, hi = coords[0], coords[-1]
        if v < lo - _LATTICE_TOL or v > hi + _LATTICE_TOL:
            raise ExtrapolationError(
                f"coordinate {v} outside grid hull [{lo}, {hi}]"
            )
        if len(coords) == 1:
            return 0, 0.0
        i = bisect_right(coords, v) - 1
        i = min(max(i, 0), len(coords) - 2)
        frac = (v - coords[i]) / (coords[i + 1] - coords[i])
        return i, min(max(frac, 0.0), 1.0)

    def _trilinear(self, p: Vec3) -> tuple[float, float]:
        xs, ys, zs = self._axes
        (ix, fx), (iy, fy), (iz, fz) = (
            self._axis_cell(xs, p[0]),
            self._axis_cell(ys, p[1]),
            self._axis_cell(zs, p[2]),
        )
        temp = rh = 0.0
        for dx, wx in ((0, 1 - fx), (1, fx)):
            if wx == 0.0:
                continue
            for dy, wy in ((0, 1 - fy), (1, fy)):
                if wy == 0.0:
                    continue
                for dz, wz in ((0, 1 - fz), (1, fz)):
                    if wz == 0.0:
                        continue
                    w = wx * wy * wz
                    node = self._grid[
                        (min(ix + dx, len(xs) - 1),
                         min(iy + dy, len(ys) - 1),
                         min(iz + dz, len(zs) - 1))
                    ]
                    temp += w * node[0]
                    rh += w * node[1]
        return temp, rh

    def _bell(self, p: Vec3) -> tuple[float, float]:
        sigma = self.kernel_sigma or 1.0
        d2s = [
            sum((p[a] - pos[a]) ** 2 for a in range(3))
            for pos, _ in self.samples
        ]
        best = min(range(len(d2s)), key=d2s.__getitem__)
        if math.sqrt(d2s[best]) < self.snap_epsilon:
            s = self.samples[best][1]
            return s.temp, s.rh
        # Shift by the smallest distance so the weights never all underflow;
        # normalization cancels the shift.
        d2min = d2s[best]
        wsum = temp = rh = 0.0
        for d2, (_, s) in zip(d2s, self.samples):
            w = math.exp(-(d2 - d2min) / (2 * sigma**2))
            wsum += w
            temp += w * s.temp
            rh += w * s.rh
        return temp / wsum, rh / wsum


def reconstruct(fld: ReconstructionField, p: Vec3) -> tuple[float, float]:
    return fld.value_at(p)


@dataclass(frozen=True)
class ColorMap:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"colormap needs lo < hi, got [{self.lo}, {self.hi}]")


def color_for(value: float, cmap: ColorMap) -> tuple[float, float, float]:
    """Blue-to-red ramp: (0,0,1) at/below lo, (1,0,0) at/above hi."""
    u = (value - cmap.lo) / (cmap.hi - cmap.lo)
    u = min(max(u, 0.0), 1.0)
    return (u, 0.0, 1.0 - u)


@dataclass(frozen=True)
class AlphaRamp:
    t_near: float = 0.4
    t_far: float = 0.85
    d_ref: float = 50.0


def alpha_for_distance(d: float, ramp: AlphaRamp = AlphaRamp()) -> float:
    """Transparency rises linearly with viewer distance, clamped at d_ref."""
    u = min(max(d, 0.0) / ramp.d_ref, 1.0)
    alpha = ramp.t_near + (ramp.t_far - ramp.t_near) * u
    return min(max(alpha, min(ramp.t_near, ramp.t_far)), max(ramp.t_near, ramp.t_far))


def scenario_from_dict(raw: dict) -> FieldScenario:
    hotspots = tuple(
        Hotspot(
            center=(float(h["center"][0]), float(h["center"][1]), float(h["center"][2])),
            amplitude_temp=float(h.get("amplitude_temp", 0.0)),
            amplitude_rh=float(h.get("amplitude_rh", 0.0)),
            sigma=float(h.get("sigma", 1.0)),
            onset=float(h.get("onset", 0.0)),
            decay=float(h.get("decay", 0.0)),
        )
        for h in raw.get("hotspots", [])
    )
    d = raw.get("diurnal", {})
    return FieldScenario(
        baseline_temp=float(raw.get("baseline_temp", 20.0)),
        baseline_rh=float(raw.get("baseline_rh", 50.0)),
        hotspots=hotspots,
        diurnal=Diurnal(
            amplitude=float(d.get("amplitude", 0.0)),
            period=float(d.get("period", 86400.0)),
        ),
    )


def scenario_to_dict(s: FieldScenario) -> dict:
    return {
        "baseline_temp": s.baseline_temp,
        "baseline_rh": s.baseline_rh,
        "hotspots": [
            {
                "center": list(h.center),
                "amplitude_temp": h.amplitude_temp,
                "amplitude_rh": h.amplitude_rh,
                "sigma": h.sigma,
                "onset": h.onset,
                "decay": h.decay,
            }
            for h in s.hotspots
        ],
        "diurnal": {"amplitude": s.diurnal.amplitude, "period": s.diurnal.period},
    }


DEFAULT_COLOR_MAPS = {
    "temperature": ColorMap(15.0, 35.0),
    "humidity": ColorMap(20.0, 80.0),
}


def colormaps_from_dict(raw: dict | None) -> dict[str, ColorMap]:
    maps = dict(DEFAULT_COLOR_MAPS)
    for layer, spec in (raw or {}).items():
        if layer not in maps:
            raise ValueError(f"unknown colormap layer {layer!r}")
        maps[layer] = ColorMap(float(spec["lo"]), float(spec["hi"]))
    return maps


def overheated_corner_scenario(
    envelope: tuple[Vec3, Vec3],
    amplitude_temp: float = 8.0,
    amplitude_rh: float = -8.0,
    sigma: float = 1.2,
) -> FieldScenario:
    """Defect preset: a hot patch tucked into the top min-x/min-y corner."""
    lo, hi = envelope
    center = (lo[0] + 0.3, lo[1] + 0.3, hi[2] - 0.3)
    return FieldScenario(
        hotspots=(
            Hotspot(
                center=center,
                amplitude_temp=amplitude_temp,
                amplitude_rh=amplitude_rh,
                sigma=sigma,
            ),
        )
    )


def cold_wet_corner_scenario(
    envelope: tuple[Vec3, Vec3],
    amplitude_temp: float = -6.0,
    amplitude_rh: float = 25.0,
    sigma: float = 1.0,
) -> FieldScenario:
    """Leak-damage preset: a cold, humid patch at a lower corner."""
    lo, hi = envelope
    center = (hi[0] - 0.3, hi[1] - 0.3, lo[2] + 0.3)
    return FieldScenario(
        hotspots=(
            Hotspot(
                center=center,
                amplitude_temp=amplitude_temp,
                amplitude_rh=amplitude_rh,
                sigma=sigma,
            ),
        )
    )
