"""End-to-end simulation runs on a single virtual clock.

Wires a building's endpoints, room concentrators, level buses, and the
supervisor together, drives the poll cadence for the configured duration,
and leaves behind a frame store, an exported scene, and a manifest with
checksums so identical seeds can be verified to produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

from thermomap.concentrator import Concentrator, LevelBus, reading_from_dict
from thermomap.endpoint import Endpoint, RoomLink
from thermomap.field import (
    FieldScenario,
    cold_wet_corner_scenario,
    ground_truth,
    overheated_corner_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from thermomap.geometry import (
    BuildingModel,
    ConfigError,
    PlacementStrategy,
    building_from_dict,
    place_all_sensors,
    serialize_building,
)
from thermomap.scenegen import (
    FogOptions,
    FogType,
    Layer,
    PrimitiveKind,
    SceneOptions,
    WallMode,
    generate_scene,
    legend,
    serialize_scene_options,
)
from thermomap.supervisor import FrameStore, Supervisor
from thermomap.x3d import serialize_x3d

log = logging.getLogger(__name__)

BANDWIDTH_BUDGET_BPS = 1_000_000  # radio ceiling the simulation must stay under

SCENARIO_PRESETS = {
    "overheated_corner": overheated_corner_scenario,
    "cold_wet_corner": cold_wet_corner_scenario,
}


class VirtualClock:
    """Centrally advanced simulation time; everything reads, only runs write."""

    def __init__(self, now: float = 0.0):
        self.now = now

    def advance_to(self, t: float) -> None:
        if t < self.now:
            raise ValueError(f"clock cannot run backwards: {t} < {self.now}")
        self.now = t


@dataclass(frozen=True)
class RunConfig:
    building: dict[str, Any]
    scenario: FieldScenario = dc_field(default_factory=FieldScenario)
    cadence: float = 60.0
    duration: float = 3600.0
    seed: int = 0
    strategy: PlacementStrategy = PlacementStrategy.CORNERS8
    noise: bool = True
    sample_period: float | None = None  # None -> match the poll cadence
    scene: dict[str, Any] = dc_field(default_factory=dict)
    out_dir: Path = Path("out")

    def __post_init__(self) -> None:
        if self.cadence <= 0:
            raise ConfigError(f"cadence must be positive, got {self.cadence}")
        if self.duration < self.cadence:
            raise ConfigError(
                f"duration {self.duration} must be at least one cadence ({self.cadence})"
            )
        if self.sample_period is not None and self.sample_period <= 0:
            raise ConfigError("sample_period must be positive when set")


def resolve_scenario(spec: Any, model: BuildingModel) -> FieldScenario:
    """Accept a scenario dict, a named preset, or nothing (quiet baseline)."""
    if spec is None:
        return FieldScenario()
    if isinstance(spec, str):
        preset = SCENARIO_PRESETS.get(spec)
        if preset is None:
            raise ConfigError(
                f"unknown scenario preset {spec!r}; known: {sorted(SCENARIO_PRESETS)}"
            )
        return preset(model.envelope)
    if isinstance(spec, dict):
        return scenario_from_dict(spec)
    raise ConfigError(f"scenario must be a dict or preset name, got {type(spec).__name__}")


def scene_options_from_dict(raw: dict[str, Any]) -> SceneOptions:
    """SceneOptions from loose JSON config keys, with friendly aliases."""
    kwargs: dict[str, Any] = {}
    if "primitive" in raw:
        name = {"tetra": "tetrahedron"}.get(raw["primitive"], raw["primitive"])
        kwargs["primitive"] = PrimitiveKind(name)
    if "layer" in raw:
        kwargs["layer"] = Layer(raw["layer"])
    if "walls" in raw:
        name = {"flat": "flat_translucent", "wire": "wireframe"}.get(raw["walls"], raw["walls"])
        kwargs["walls"] = WallMode(name)
    if "cell_spacing" in raw:
        kwargs["cell_spacing"] = float(raw["cell_spacing"])
    if "detail_radius" in raw:
        kwargs["detail_radius"] = float(raw["detail_radius"])
    if "mid_radius" in raw:
        kwargs["mid_radius"] = float(raw["mid_radius"])
    if "max_nominal_polygons" in raw:
        v = raw["max_nominal_polygons"]
        kwargs["max_nominal_polygons"] = None if v is None else int(v)
    if "viewpoint" in raw and raw["viewpoint"] is not None:
        x, y, z = raw["viewpoint"]
        kwargs["viewpoint"] = (float(x), float(y), float(z))
    if "fog" in raw and raw["fog"] is not None:
        f = raw["fog"]
        color = tuple(float(c) for c in f["color"]) if f.get("color") else None
        kwargs["fog"] = FogOptions(kind=FogType(f.get("type", "linear")), color=color)
    try:
        return SceneOptions(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(raw: dict[str, Any], base_dir: Path, out_dir: Path) -> RunConfig:
    if "building" in raw:
        building = raw["building"]
    elif "building_path" in raw:
        building = json.loads((base_dir / raw["building_path"]).read_text(encoding="utf-8"))
    else:
        raise ConfigError("config needs a 'building' object or a 'building_path'")
    model = building_from_dict(building)  # validate early; reused below
    scenario = resolve_scenario(raw.get("scenario"), model)
    try:
        strategy = PlacementStrategy(raw.get("strategy", "corners8"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        building=building,
        scenario=scenario,
        cadence=float(raw.get("cadence", 60.0)),
        duration=float(raw.get("duration", 3600.0)),
        seed=int(raw.get("seed", 0)),
        strategy=strategy,
        noise=bool(raw.get("noise", True)),
        sample_period=(None if raw.get("sample_period") is None else float(raw["sample_period"])),
        scene=dict(raw.get("scene", {})),
        out_dir=out_dir,
    )


def load_config(path: Path | str, out_dir: Path | str) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}") from exc
    return config_from_dict(raw, path.parent, Path(out_dir))


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    store_dir: Path
    manifest_path: Path
    frame_count: int
    bandwidth_bps: float


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class SimulationRig:
    """The assembled tiers for one building, ready to be driven by a clock."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.model = building_from_dict(cfg.building)
        self.placements = place_all_sensors(self.model, cfg.strategy)
        self.clock = VirtualClock()
        sample_period = cfg.sample_period if cfg.sample_period is not None else cfg.cadence

        def truth(pos, t):
            return ground_truth(cfg.scenario, pos, t)

        self.endpoints: list[Endpoint] = []
        self.links: dict[str, RoomLink] = {}
        self.concentrators: dict[str, Concentrator] = {}
        self.buses: dict[int, LevelBus] = {}
        by_room: dict[str, list] = {}
        for placement in self.placements:
            by_room.setdefault(placement.room_id, []).append(placement)
        for level in self.model.levels:
            bus = LevelBus(level.index)
            self.buses[level.index] = bus
            for room in level.rooms:
                link = RoomLink(room.id, seed=cfg.seed)
                roster: dict[int, str] = {}
                for addr, placement in enumerate(by_room[room.id]):
                    ep = Endpoint(
                        placement.sensor_id,
                        addr,
                        placement.position,
                        truth,
                        sample_period=sample_period,
                        seed=cfg.seed,
                        noise=cfg.noise,
                    )
                    link.attach(ep)
                    roster[addr] = placement.sensor_id
                    self.endpoints.append(ep)
                dc = Concentrator(
                    room.id, link, roster, poll_period=cfg.cadence, clock=self.clock
                )
                bus.attach(dc)
                self.links[room.id] = link
                self.concentrators[room.id] = dc

    def bytes_transferred(self) -> int:
        room_bytes = sum(link.bytes_transferred for link in self.links.values())
        bus_bytes = sum(bus.bytes_transferred for bus in self.buses.values())
        return room_bytes + bus_bytes

    def run_cycle(self, t: float, supervisor: Supervisor) -> None:
        """One poll cadence: sample, poll each room, pull readings upstream."""
        self.clock.advance_to(t)
        for ep in self.endpoints:
            ep.advance_to(t)
        for dc in self.concentrators.values():
            dc.poll_cycle(t)
        for level in self.model.levels:
            bus = self.buses[level.index]
            for room in level.rooms:
                response = bus.request(room.id, "latest_cycle")
                if response.ok and response.payload is not None:
                    supervisor.ingest(reading_from_dict(response.payload))
        supervisor.advance(t)


def run_simulation(cfg: RunConfig) -> RunArtifacts:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rig = SimulationRig(cfg)
    store_dir = out_dir / "store"
    store_dir.mkdir(parents=True, exist_ok=True)
    # A fresh run owns the whole store: stale frame logs from a previous
    # run would otherwise collide with the restarted virtual clock.
    for stale in store_dir.glob("*.frames"):
        stale.unlink()
    store = FrameStore(store_dir)
    supervisor = Supervisor(
        rig.model, rig.placements, store, poll_period=cfg.cadence
    )
    cycles = int(cfg.duration // cfg.cadence)
    log.info(
        "simulating %s: %d rooms, %d endpoints, %d cycles at %.3gs cadence",
        rig.model.id, len(rig.model.rooms), len(rig.endpoints), cycles, cfg.cadence,
    )
    for k in range(1, cycles + 1):
        rig.run_cycle(k * cfg.cadence, supervisor)
    supervisor.flush()

    bandwidth_bps = rig.bytes_transferred() * 8.0 / cfg.duration
    if bandwidth_bps >= BANDWIDTH_BUDGET_BPS:
        raise RuntimeError(
            f"simulated traffic {bandwidth_bps:.0f} bps exceeds the "
            f"{BANDWIDTH_BUDGET_BPS} bps radio budget"
        )

    building_path = out_dir / "building.json"
    building_path.write_text(serialize_building(rig.model), encoding="utf-8")

    opts = scene_options_from_dict(cfg.scene)
    scene_path = out_dir / "scene_final.x3d"
    legend_path = out_dir / "legend.json"
    frame_count = store.frame_count(rig.model.id)
    if frame_count:
        final = store.latest(rig.model.id)
        scene_path.write_text(serialize_x3d(generate_scene(final, rig.model, opts)), encoding="utf-8")
        legend_path.write_text(
            json.dumps(legend(opts), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    artifacts = [building_path, scene_path, legend_path]
    artifacts.extend(sorted(store_dir.glob("*.frames")))
    manifest = {
        "building_id": rig.model.id,
        "frames": frame_count,
        "cycles": cycles,
        "cadence": cfg.cadence,
        "duration": cfg.duration,
        "seed": cfg.seed,
        "strategy": cfg.strategy.value,
        "noise": cfg.noise,
        "scenario": scenario_to_dict(cfg.scenario),
        "scene": serialize_scene_options(opts),
        "bandwidth_bps": bandwidth_bps,
        "files": {
            str(p.relative_to(out_dir)): _sha256(p) for p in artifacts if p.exists()
        },
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return RunArtifacts(
        out_dir=out_dir,
        store_dir=store_dir,
        manifest_path=manifest_path,
        frame_count=frame_count,
        bandwidth_bps=bandwidth_bps,
    )
