"""Building geometry: rooms as axis-aligned boxes, sensor placement, cell grids.

Buildings load from a JSON config (meters everywhere). Rooms are axis-aligned
parallelepipeds grouped into levels; sensor placement strategies put virtual
sensors on room boundaries, and cell grids tile room volumes with tangent
cells for scene generation.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum

Vec3 = tuple[float, float, float]

_EPS = 1e-9


class ConfigError(ValueError):
    """Raised when a building config fails to parse or violates an invariant."""


class RoomKind(str, Enum):
    BEDROOM = "bedroom"
    BATHROOM = "bathroom"
    OTHER = "other"


class PlacementStrategy(str, Enum):
    """How sensors are distributed inside a room.

    CORNERS8(+FACE_CENTERS14) keep sensors on corners and wall midpoints;
    DENSE16 adds the floor and ceiling edge midpoints to the corners so all
    sixteen sensors stay on the room boundary.
    """

    CORNERS8 = "corners8"
    FACES14 = "corners_plus_face_centers14"
    DENSE16 = "dense16"


@dataclass(frozen=True)
class Room:
    id: str
    level: int
    min_corner: Vec3
    max_corner: Vec3
    kind: RoomKind = RoomKind.OTHER

    @property
    def extent(self) -> Vec3:
        return (
            self.max_corner[0] - self.min_corner[0],
            self.max_corner[1] - self.min_corner[1],
            self.max_corner[2] - self.min_corner[2],
        )

    @property
    def center(self) -> Vec3:
        return (
            (self.min_corner[0] + self.max_corner[0]) / 2,
            (self.min_corner[1] + self.max_corner[1]) / 2,
            (self.min_corner[2] + self.max_corner[2]) / 2,
        )

    @property
    def volume(self) -> float:
        ex, ey, ez = self.extent
        return ex * ey * ez

    def contains(self, p: Vec3, tol: float = _EPS) -> bool:
        """True if p lies inside or on the boundary of the room AABB."""
        return all(
            self.min_corner[a] - tol <= p[a] <= self.max_corner[a] + tol
            for a in range(3)
        )


@dataclass(frozen=True)
class Level:
    index: int
    rooms: tuple[Room, ...]


@dataclass(frozen=True)
class SensorPlacement:
    sensor_id: str
    room_id: str
    position: Vec3


@dataclass(frozen=True)
class BuildingModel:
    id: str
    levels: tuple[Level, ...]
    envelope: tuple[Vec3, Vec3] = field(default=((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)))

    @property
    def rooms(self) -> tuple[Room, ...]:
        return tuple(r for lv in self.levels for r in lv.rooms)

    def room(self, room_id: str) -> Room:
        for r in self.rooms:
            if r.id == room_id:
                return r
        raise KeyError(room_id)


def aabb_distance(p: Vec3, min_corner: Vec3, max_corner: Vec3) -> float:
    """Euclidean distance from a point to an AABB (0 inside or on boundary)."""
    d2 = 0.0
    for a in range(3):
        if p[a] < min_corner[a]:
            d2 += (min_corner[a] - p[a]) ** 2
        elif p[a] > max_corner[a]:
            d2 += (p[a] - max_corner[a]) ** 2
    return math.sqrt(d2)


def _interiors_overlap(a: Room, b: Room) -> bool:
    # Touching faces are allowed; only strict interior intersection rejects.
    return all(
        a.min_corner[ax] < b.max_corner[ax] - _EPS
        and b.min_corner[ax] < a.max_corner[ax] - _EPS
        for ax in range(3)
    )


def _vec3(value: object, where: str) -> Vec3:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{where}: expected a list of 3 numbers, got {value!r}")
    return (float(value[0]), float(value[1]), float(value[2]))


def _room_from_dict(raw: object, level_index: int, where: str) -> Room:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object, got {type(raw).__name__}")
    try:
        room_id = raw["id"]
        lo = _vec3(raw["min"], f"{where}.min")
        hi = _vec3(raw["max"], f"{where}.max")
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc.args[0]!r}") from None
    if not isinstance(room_id, str) or not room_id:
        raise ConfigError(f"{where}.id: expected a non-empty string")
    kind_raw = raw.get("kind", "other")
    try:
        kind = RoomKind(kind_raw)
    except ValueError:
        raise ConfigError(
            f"{where}.kind: {kind_raw!r} is not one of "
            f"{[k.value for k in RoomKind]}"
        ) from None
    for ax, name in enumerate("xyz"):
        if not lo[ax] < hi[ax]:
            raise ConfigError(
                f"invariant violation in room {room_id!r}: "
                f"max.{name} ({hi[ax]}) must exceed min.{name} ({lo[ax]})"
            )
    return Room(id=room_id, level=level_index, min_corner=lo, max_corner=hi, kind=kind)


def building_from_dict(raw: dict) -> BuildingModel:
    """Validate a parsed config dict (the "building" section) into a model."""
    if not isinstance(raw, dict):
        raise ConfigError("building: expected an object")
    building_id = raw.get("id")
    if not isinstance(building_id, str) or not building_id:
        raise ConfigError("building.id: expected a non-empty string")
    levels_raw = raw.get("levels")
    if not isinstance(levels_raw, list) or not levels_raw:
        raise ConfigError("building.levels: expected a non-empty list")

    levels: list[Level] = []
    seen_ids: dict[str, str] = {}
    for n, lv in enumerate(sorted(levels_raw, key=lambda d: d.get("index", -1))):
        if not isinstance(lv, dict):
            raise ConfigError(f"building.levels[{n}]: expected an object")
        index = lv.get("index")
        if index != n:
            raise ConfigError(
                f"building.levels: indices must be contiguous from 0 "
                f"(expected {n}, got {index!r})"
            )
        rooms: list[Room] = []
        for m, rr in enumerate(lv.get("rooms", [])):
            where = f"building.levels[{n}].rooms[{m}]"
            room = _room_from_dict(rr, n, where)
            if room.id in seen_ids:
                raise ConfigError(
                    f"invariant violation: room id {room.id!r} duplicated "
                    f"(first seen at {seen_ids[room.id]})"
                )
            seen_ids[room.id] = where
            for other in rooms:
                if _interiors_overlap(room, other):
                    raise ConfigError(
                        f"invariant violation: rooms {other.id!r} and {room.id!r} "
                        f"overlap on level {n}"
                    )
            rooms.append(room)
        if not rooms:
            raise ConfigError(f"building.levels[{n}].rooms: expected a non-empty list")
        levels.append(Level(index=n, rooms=tuple(rooms)))

    all_rooms = [r for lv in levels for r in lv.rooms]
    env_min = tuple(min(r.min_corner[a] for r in all_rooms) for a in range(3))
    env_max = tuple(max(r.max_corner[a] for r in all_rooms) for a in range(3))
    return BuildingModel(id=building_id, levels=tuple(levels), envelope=(env_min, env_max))


def load_building(config_text: str) -> BuildingModel:
    """Parse and validate a building config JSON document.

    Accepts either the full config file (with a top-level "building" key) or
    the building section alone. Units are meters.
    """
    try:
        raw = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    section = raw.get("building", raw)
    return building_from_dict(section)


def building_to_dict(model: BuildingModel) -> dict:
    return {
        "id": model.id,
        "levels": [
            {
                "index": lv.index,
                "rooms": [
                    {
                        "id": r.id,
                        "min": list(r.min_corner),
                        "max": list(r.max_corner),
                        "kind": r.kind.value,
                    }
                    for r in lv.rooms
                ],
            }
            for lv in model.levels
        ],
    }


def serialize_building(model: BuildingModel) -> str:
    """Inverse of load_building: load_building(serialize_building(m)) == m."""
    return json.dumps({"building": building_to_dict(model)}, indent=2, sort_keys=True)


def _strategy_points(room: Room, strategy: PlacementStrategy) -> list[Vec3]:
    lo, hi = room.min_corner, room.max_corner
    cx, cy, cz = room.center
    corners = [
        (x, y, z)
        for x, y, z in itertools.product((lo[0], hi[0]), (lo[1], hi[1]), (lo[2], hi[2]))
    ]
    if strategy is PlacementStrategy.CORNERS8:
        return corners
    if strategy is PlacementStrategy.FACES14:
        faces = [
            (lo[0], cy, cz),
            (hi[0], cy, cz),
            (cx, lo[1], cz),
            (cx, hi[1], cz),
            (cx, cy, lo[2]),
            (cx, cy, hi[2]),
        ]
        return corners + faces
    if strategy is PlacementStrategy.DENSE16:
        # Corners plus the midpoints of the four floor edges and four
        # ceiling edges; everything stays on the room boundary.
        edge_mids = [
            (cx, y, z)
            for y in (lo[1], hi[1])
            for z in (lo[2], hi[2])
        ] + [
            (x, cy, z)
            for x in (lo[0], hi[0])
            for z in (lo[2], hi[2])
        ]
        return corners + edge_mids
    raise ValueError(f"unknown placement strategy: {strategy!r}")


def place_sensors(room: Room, strategy: PlacementStrategy) -> list[SensorPlacement]:
    """Deterministic sensor placement: points sorted by z, then y, then x."""
    points = sorted(_strategy_points(room, strategy), key=lambda p: (p[2], p[1], p[0]))
    return [
        SensorPlacement(sensor_id=f"{room.id}-s{i:02d}", room_id=room.id, position=p)
        for i, p in enumerate(points)
    ]


def place_all_sensors(
    model: BuildingModel, strategy: PlacementStrategy
) -> list[SensorPlacement]:
    return [p for room in model.rooms for p in place_sensors(room, strategy)]


def cell_counts(room: Room, spacing: float) -> tuple[int, int, int]:
    ex, ey, ez = room.extent
    return (
        int(math.floor(ex / spacing + _EPS)),
        int(math.floor(ey / spacing + _EPS)),
        int(math.floor(ez / spacing + _EPS)),
    )


def room_cell_grid(room: Room, spacing: float) -> list[Vec3]:
    """Centers of a regular cell grid filling the room AABB.

    Per axis the count is floor(extent/spacing) and the block of cells is
    centered in the room, so a cell radius of spacing/2 makes adjacent cells
    tangent.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if spacing > min(room.extent) + _EPS:
        raise ValueError(
            f"spacing {spacing} exceeds the smallest dimension of room "
            f"{room.id!r} ({min(room.extent)})"
        )
    nx, ny, nz = cell_counts(room, spacing)
    margins = [
        room.min_corner[a] + (room.extent[a] - n * spacing) / 2
        for a, n in enumerate((nx, ny, nz))
    ]
    return [
        (
            margins[0] + (i + 0.5) * spacing,
            margins[1] + (j + 0.5) * spacing,
            margins[2] + (k + 0.5) * spacing,
        )
        for k in range(nz)
        for j in range(ny)
        for i in range(nx)
    ]
