"""X3D thermal-map generation from building frames.

Every room is filled with a grid of tangent semi-transparent primitives
colored by the reconstructed field at each cell center. A viewpoint enables
region-of-interest generation: nearby rooms get the full grid, mid-range
rooms collapse to a single aggregate box, distant rooms contribute walls
only. A nominal polygon budget downgrades the primitive kind before a scene
grows too heavy for interactive playback.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Any

from thermomap.field import (
    DEFAULT_COLOR_MAPS,
    AlphaRamp,
    ColorMap,
    ExtrapolationError,
    ReconstructionField,
    ReconstructionMethod,
    SensorSample,
    alpha_for_distance,
    color_for,
    is_complete_lattice,
    reconstruct,
)
from thermomap.geometry import BuildingModel, Room, Vec3, aabb_distance, room_cell_grid
from thermomap.supervisor import ThermalFrame
from thermomap.x3d import X3DDocument, X3DNode, fmt_num, fmt_vec

log = logging.getLogger(__name__)


class PrimitiveKind(str, Enum):
    SPHERE = "sphere"
    BOX = "box"
    TETRAHEDRON = "tetrahedron"
    BILLBOARD = "billboard"


class Layer(str, Enum):
    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"


class WallMode(str, Enum):
    FLAT_TRANSLUCENT = "flat_translucent"
    WIREFRAME = "wireframe"


class FogType(str, Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


# Nominal polygon accounting per primitive kind.
POLYGON_TABLE = {
    PrimitiveKind.SPHERE: 300,
    PrimitiveKind.BOX: 12,
    PrimitiveKind.TETRAHEDRON: 4,
    PrimitiveKind.BILLBOARD: 2,
}

# Downgrade ladder when a scene would exceed the polygon budget.
_LADDER = (
    PrimitiveKind.SPHERE,
    PrimitiveKind.BOX,
    PrimitiveKind.TETRAHEDRON,
    PrimitiveKind.BILLBOARD,
)

DEFAULT_MAX_NOMINAL_POLYGONS = 150_000

_WALL_COLOR = (0.65, 0.65, 0.65)
_WALL_TRANSPARENCY = 0.85
_WIRE_WIDTH = 0.03  # meters; edge quads for wireframe walls

LAYER_UNITS = {Layer.TEMPERATURE: "degC", Layer.HUMIDITY: "%RH"}


class SceneError(ValueError):
    """Frame/model mismatch or invalid scene options."""


@dataclass(frozen=True)
class FogOptions:
    kind: FogType = FogType.LINEAR
    color: tuple[float, float, float] | None = None  # default: mean field color


@dataclass(frozen=True)
class SceneOptions:
    primitive: PrimitiveKind = PrimitiveKind.SPHERE
    layer: Layer = Layer.TEMPERATURE
    walls: WallMode = WallMode.FLAT_TRANSLUCENT
    cell_spacing: float = 1.0
    color_map: ColorMap | None = None  # None -> default map for the layer
    fog: FogOptions | None = None
    viewpoint: Vec3 | None = None
    detail_radius: float = 20.0
    mid_radius: float = 60.0
    alpha: AlphaRamp = dc_field(default_factory=AlphaRamp)
    max_nominal_polygons: int | None = DEFAULT_MAX_NOMINAL_POLYGONS

    def __post_init__(self) -> None:
        if self.cell_spacing <= 0:
            raise SceneError(f"cell_spacing must be positive, got {self.cell_spacing}")
        if not self.detail_radius < self.mid_radius:
            raise SceneError(
                f"detail_radius {self.detail_radius} must be < mid_radius {self.mid_radius}"
            )

    def effective_color_map(self) -> ColorMap:
        return self.color_map or DEFAULT_COLOR_MAPS[self.layer.value]


def nominal_polycount(kind: PrimitiveKind | str) -> int:
    try:
        return POLYGON_TABLE[PrimitiveKind(kind)]
    except ValueError:
        raise SceneError(f"unknown primitive kind {kind!r}") from None


def legend(opts: SceneOptions) -> dict[str, Any]:
    """Sidecar legend describing the color mapping of a scene."""
    cmap = opts.effective_color_map()
    return {
        "layer": opts.layer.value,
        "lo": cmap.lo,
        "hi": cmap.hi,
        "units": LAYER_UNITS[opts.layer],
    }


def serialize_scene_options(opts: SceneOptions) -> dict[str, Any]:
    """JSON-friendly echo of the options that shaped a scene."""
    out: dict[str, Any] = {
        "primitive": opts.primitive.value,
        "layer": opts.layer.value,
        "walls": opts.walls.value,
        "cell_spacing": opts.cell_spacing,
        "detail_radius": opts.detail_radius,
        "mid_radius": opts.mid_radius,
        "max_nominal_polygons": opts.max_nominal_polygons,
        "viewpoint": list(opts.viewpoint) if opts.viewpoint is not None else None,
    }
    cmap = opts.effective_color_map()
    out["color_map"] = {"lo": cmap.lo, "hi": cmap.hi}
    if opts.fog is not None:
        out["fog"] = {
            "type": opts.fog.kind.value,
            "color": list(opts.fog.color) if opts.fog.color else None,
        }
    return out


def field_from_frame(frame: ThermalFrame, method: ReconstructionMethod | None = None) -> ReconstructionField:
    """Build the interpolator for a frame's samples.

    Samples sharing a position (sensors on a shared room corner) are averaged.
    Positions forming a complete rectangular lattice get grid interpolation;
    anything else falls back to the bell-kernel weighting.
    """
    if not frame.samples:
        raise SceneError(f"frame at t={frame.t} has no samples to reconstruct from")
    by_pos: dict[Vec3, list[tuple[str, float, float]]] = {}
    for sid in sorted(frame.samples):
        pos, temp, rh = frame.samples[sid]
        by_pos.setdefault(pos, []).append((sid, temp, rh))
    merged: list[tuple[Vec3, SensorSample]] = []
    for pos, group in by_pos.items():
        sid = group[0][0]
        temp = sum(g[1] for g in group) / len(group)
        rh = sum(g[2] for g in group) / len(group)
        merged.append((pos, SensorSample(sid, frame.t, temp, rh)))
    if method is None:
        positions = [pos for pos, _ in merged]
        method = (
            ReconstructionMethod.LINEAR_GRID
            if is_complete_lattice(positions)
            else ReconstructionMethod.BELL_KERNEL
        )
    return ReconstructionField(method=method, samples=merged)


def _clamp_into(p: Vec3, lo: Vec3, hi: Vec3) -> Vec3:
    return (
        min(max(p[0], lo[0]), hi[0]),
        min(max(p[1], lo[1]), hi[1]),
        min(max(p[2], lo[2]), hi[2]),
    )


def _eval(fld: ReconstructionField, p: Vec3) -> tuple[float, float]:
    """Field value at p, clamping into the sample hull if p lies outside it."""
    try:
        return reconstruct(fld, p)
    except ExtrapolationError:
        lo = tuple(min(pos[i] for pos, _ in fld.samples) for i in range(3))
        hi = tuple(max(pos[i] for pos, _ in fld.samples) for i in range(3))
        return reconstruct(fld, _clamp_into(p, lo, hi))


def _layer_value(values: tuple[float, float], layer: Layer) -> float:
    return values[0] if layer is Layer.TEMPERATURE else values[1]


def _round6(x: float) -> float:
    # Color and transparency channels are display values in [0, 1]; six
    # decimals is below any renderer's quantization and strips the
    # floating-point dust interpolation leaves on exact lattice values.
    return round(x, 6) + 0.0


def _material(color: tuple[float, float, float], transparency: float) -> X3DNode:
    return X3DNode(
        "Appearance",
        children=[
            X3DNode(
                "Material",
                {
                    "diffuseColor": fmt_vec(*(_round6(c) for c in color)),
                    "transparency": fmt_num(_round6(transparency)),
                },
            )
        ],
    )


def _tetra_geometry(spacing: float) -> X3DNode:
    # Regular tetrahedron on alternating cube corners, circumradius spacing/2.
    s = (spacing / 2.0) / math.sqrt(3.0)
    verts = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
    points = " ".join(fmt_vec(*v) for v in verts)
    return X3DNode(
        "IndexedFaceSet",
        {"coordIndex": "0 1 2 -1 0 3 1 -1 0 2 3 -1 1 3 2 -1", "solid": "true"},
        children=[X3DNode("Coordinate", {"point": points})],
    )


def _billboard_geometry(spacing: float) -> X3DNode:
    # One camera-facing quad spanning the cell; rotates about the z axis.
    h = spacing / 2.0
    points = " ".join(
        fmt_vec(*v) for v in [(-h, 0.0, -h), (h, 0.0, -h), (h, 0.0, h), (-h, 0.0, h)]
    )
    return X3DNode(
        "IndexedFaceSet",
        {"coordIndex": "0 1 2 3 -1", "solid": "false"},
        children=[X3DNode("Coordinate", {"point": points})],
    )


def _cell_shape(kind: PrimitiveKind, spacing: float, color, transparency: float) -> X3DNode:
    """Shape (possibly under a Billboard) for one grid cell, origin-centered."""
    if kind is PrimitiveKind.SPHERE:
        geometry = X3DNode("Sphere", {"radius": fmt_num(spacing / 2.0)})
    elif kind is PrimitiveKind.BOX:
        geometry = X3DNode("Box", {"size": fmt_vec(spacing, spacing, spacing)})
    elif kind is PrimitiveKind.TETRAHEDRON:
        geometry = _tetra_geometry(spacing)
    else:
        geometry = _billboard_geometry(spacing)
    shape = X3DNode("Shape", children=[_material(color, transparency), geometry])
    if kind is PrimitiveKind.BILLBOARD:
        return X3DNode("Billboard", {"axisOfRotation": "0 0 1"}, children=[shape])
    return shape


def _box_walls(lo: Vec3, hi: Vec3, transparency: float) -> X3DNode:
    center = tuple((l + h) / 2.0 for l, h in zip(lo, hi))
    extent = tuple(h - l for l, h in zip(lo, hi))
    return X3DNode(
        "Transform",
        {"translation": fmt_vec(*center)},
        children=[
            X3DNode(
                "Shape",
                children=[
                    _material(_WALL_COLOR, transparency),
                    X3DNode("Box", {"size": fmt_vec(*extent)}),
                ],
            )
        ],
    )


def _wireframe_walls(lo: Vec3, hi: Vec3) -> X3DNode:
    """The 12 box edges as thin quads in one indexed face set."""
    (x0, y0, z0), (x1, y1, z1) = lo, hi
    edges = []
    for a, b in [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]:
        edges.append(((a[0], a[1], z0), (b[0], b[1], z0), (0.0, 0.0, 1.0)))
        edges.append(((a[0], a[1], z1), (b[0], b[1], z1), (0.0, 0.0, 1.0)))
    for x in (x0, x1):
        for y in (y0, y1):
            edges.append(((x, y, z0), (x, y, z1), (1.0, 0.0, 0.0)))
    points: list[str] = []
    indices: list[str] = []
    w = _WIRE_WIDTH / 2.0
    for n, (start, end, normal) in enumerate(edges):
        off = tuple(w * c for c in normal)
        quad = [
            tuple(s - o for s, o in zip(start, off)),
            tuple(e - o for e, o in zip(end, off)),
            tuple(e + o for e, o in zip(end, off)),
            tuple(s + o for s, o in zip(start, off)),
        ]
        points.extend(fmt_vec(*v) for v in quad)
        base = 4 * n
        indices.append(f"{base} {base + 1} {base + 2} {base + 3} -1")
    geometry = X3DNode(
        "IndexedFaceSet",
        {"coordIndex": " ".join(indices), "solid": "false"},
        children=[X3DNode("Coordinate", {"point": " ".join(points)})],
    )
    return X3DNode(
        "Transform",
        {"translation": "0 0 0"},
        children=[X3DNode("Shape", children=[_material(_WALL_COLOR, 0.0), geometry])],
    )


def _walls_node(lo: Vec3, hi: Vec3, mode: WallMode) -> tuple[X3DNode, int]:
    """Wall geometry plus its structural polygon count."""
    if mode is WallMode.FLAT_TRANSLUCENT:
        return _box_walls(lo, hi, _WALL_TRANSPARENCY), 12
    return _wireframe_walls(lo, hi), 24  # 12 edge quads, 2 triangles each


def effective_primitive(total_cells: int, opts: SceneOptions) -> PrimitiveKind:
    """Primitive kind after budget enforcement, judged on the full grid.

    The decision deliberately ignores the viewpoint so that full and
    view-dependent scenes of the same frame agree on the primitive, keeping
    the view-dependent output a strict subset in polygon terms.
    """
    kind = opts.primitive
    if opts.max_nominal_polygons is None:
        return kind
    start = _LADDER.index(kind)
    for candidate in _LADDER[start:]:
        if total_cells * POLYGON_TABLE[candidate] <= opts.max_nominal_polygons:
            if candidate is not kind:
                log.warning(
                    "polygon budget %d: downgrading primitive %s -> %s for %d cells",
                    opts.max_nominal_polygons, kind.value, candidate.value, total_cells,
                )
            return candidate
    log.warning(
        "polygon budget %d unreachable even with billboards for %d cells",
        opts.max_nominal_polygons, total_cells,
    )
    return _LADDER[-1]


def _check_frame(frame: ThermalFrame, model: BuildingModel) -> None:
    if frame.building_id != model.id:
        raise SceneError(
            f"frame belongs to building {frame.building_id!r}, not {model.id!r}"
        )


def _scene_root(opts: SceneOptions) -> X3DNode:
    scene = X3DNode("Scene")
    scene.add(X3DNode("NavigationInfo", {"type": '"FLY" "EXAMINE"'}))
    if opts.viewpoint is not None:
        scene.add(X3DNode("Viewpoint", {"position": fmt_vec(*opts.viewpoint)}))
    return scene


def _room_cells(
    scene: X3DNode,
    room: Room,
    fld: ReconstructionField,
    kind: PrimitiveKind,
    opts: SceneOptions,
    transparency: float,
) -> int:
    """Emit the full cell grid for one room; returns the cell count."""
    cmap = opts.effective_color_map()
    spacing = min(opts.cell_spacing, min(room.extent))
    count = 0
    for center in room_cell_grid(room, spacing):
        value = _layer_value(_eval(fld, center), opts.layer)
        shape = _cell_shape(kind, spacing, color_for(value, cmap), transparency)
        scene.add(
            X3DNode("Transform", {"translation": fmt_vec(*center)}, children=[shape])
        )
        count += 1
    return count


def _room_mean(room: Room, fld: ReconstructionField, opts: SceneOptions) -> float:
    spacing = min(opts.cell_spacing, min(room.extent))
    values = [
        _layer_value(_eval(fld, center), opts.layer)
        for center in room_cell_grid(room, spacing)
    ]
    return sum(values) / len(values)


def _total_cells(model: BuildingModel, opts: SceneOptions) -> int:
    total = 0
    for room in model.rooms:
        spacing = min(opts.cell_spacing, min(room.extent))
        total += len(room_cell_grid(room, spacing))
    return total


def _fog_scene(frame: ThermalFrame, model: BuildingModel, opts: SceneOptions) -> X3DDocument:
    """Alternative presentation: whole-building fog instead of cell geometry."""
    fld = field_from_frame(frame)
    cmap = opts.effective_color_map()
    scene = _scene_root(opts)
    color = opts.fog.color
    if color is None:
        mean = _room_mean_building(model, fld, opts)
        color = color_for(mean, cmap)
    lo, hi = model.envelope
    diagonal = math.dist(lo, hi)
    scene.add(
        X3DNode(
            "Fog",
            {
                "color": fmt_vec(*color),
                "fogType": "LINEAR" if opts.fog.kind is FogType.LINEAR else "EXPONENTIAL",
                "visibilityRange": fmt_num(2.0 * diagonal),
            },
        )
    )
    structural = _emit_walls(scene, frame, model, opts, rooms=model.rooms)
    return X3DDocument(scene=scene, nominal_polygons=0, structural_polygons=structural)


def _room_mean_building(model: BuildingModel, fld: ReconstructionField, opts: SceneOptions) -> float:
    values = [_room_mean(room, fld, opts) for room in model.rooms]
    return sum(values) / len(values)


def _emit_walls(
    scene: X3DNode,
    frame: ThermalFrame,
    model: BuildingModel,
    opts: SceneOptions,
    rooms: list[Room],
) -> int:
    """Envelope plus per-room walls; returns structural polygon count."""
    structural = 0
    lo, hi = model.envelope
    node, count = _walls_node(lo, hi, opts.walls)
    scene.add(node)
    structural += count
    for room in rooms:
        node, count = _walls_node(room.min_corner, room.max_corner, opts.walls)
        scene.add(node)
        structural += count
    return structural


def generate_scene(frame: ThermalFrame, model: BuildingModel, opts: SceneOptions) -> X3DDocument:
    """Full thermal map: one primitive per grid cell in every room."""
    _check_frame(frame, model)
    if opts.fog is not None:
        return _fog_scene(frame, model, opts)
    fld = field_from_frame(frame)
    kind = effective_primitive(_total_cells(model, opts), opts)
    if opts.viewpoint is not None:
        lo, hi = model.envelope
        transparency = alpha_for_distance(aabb_distance(opts.viewpoint, lo, hi), opts.alpha)
    else:
        transparency = opts.alpha.t_near
    scene = _scene_root(opts)
    cells = 0
    for room in model.rooms:
        cells += _room_cells(scene, room, fld, kind, opts, transparency)
    structural = _emit_walls(scene, frame, model, opts, rooms=model.rooms)
    return X3DDocument(
        scene=scene,
        nominal_polygons=cells * POLYGON_TABLE[kind],
        structural_polygons=structural,
    )


def view_dependent_scene(frame: ThermalFrame, model: BuildingModel, opts: SceneOptions) -> X3DDocument:
    """Region-of-interest map: full grid near, aggregate mid, walls-only far."""
    _check_frame(frame, model)
    if opts.viewpoint is None:
        raise SceneError("view_dependent_scene requires a viewpoint")
    if opts.fog is not None:
        return _fog_scene(frame, model, opts)
    fld = field_from_frame(frame)
    kind = effective_primitive(_total_cells(model, opts), opts)
    cmap = opts.effective_color_map()
    scene = _scene_root(opts)
    nominal = 0
    walled_rooms: list[Room] = []
    for room in model.rooms:
        d = aabb_distance(opts.viewpoint, room.min_corner, room.max_corner)
        if d > opts.mid_radius:
            continue
        transparency = alpha_for_distance(d, opts.alpha)
        walled_rooms.append(room)
        if d <= opts.detail_radius:
            cells = _room_cells(scene, room, fld, kind, opts, transparency)
            nominal += cells * POLYGON_TABLE[kind]
        else:
            color = color_for(_room_mean(room, fld, opts), cmap)
            center = room.center
            scene.add(
                X3DNode(
                    "Transform",
                    {"translation": fmt_vec(*center)},
                    children=[
                        X3DNode(
                            "Shape",
                            children=[
                                _material(color, transparency),
                                X3DNode("Box", {"size": fmt_vec(*room.extent)}),
                            ],
                        )
                    ],
                )
            )
            nominal += POLYGON_TABLE[PrimitiveKind.BOX]
    structural = _emit_walls(scene, frame, model, opts, rooms=walled_rooms)
    return X3DDocument(scene=scene, nominal_polygons=nominal, structural_polygons=structural)
