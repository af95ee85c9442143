"""Viewer-facing HTTP service over a frame store.

All endpoints are GETs: building listing, frame range queries, X3D scene
generation for a stored or live timestamp (view-dependent when a viewpoint
is supplied), playback plans, and the color-legend sidecar. "Live" frames
replay the store against wall time at a configurable speed so a finished
simulation can still drive a real-time animation.
"""

from __future__ import annotations

import json
import time

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware

from thermomap.geometry import BuildingModel, building_from_dict
from thermomap.scenegen import (
    Layer,
    PrimitiveKind,
    SceneOptions,
    WallMode,
    generate_scene,
    legend,
    view_dependent_scene,
)
from thermomap.supervisor import FrameStore, NoFramesError, UnknownBuildingError, playback
from thermomap.x3d import serialize_x3d

X3D_MEDIA_TYPE = "model/x3d+xml"

_WALL_ALIASES = {"flat": WallMode.FLAT_TRANSLUCENT, "wire": WallMode.WIREFRAME}
_PRIMITIVE_ALIASES = {"tetra": PrimitiveKind.TETRAHEDRON}


def _parse_enum(cls, raw: str, aliases: dict, what: str):
    if raw in aliases:
        return aliases[raw]
    try:
        return cls(raw)
    except ValueError:
        valid = sorted({m.value for m in cls} | set(aliases))
        raise HTTPException(status_code=400, detail=f"invalid {what} {raw!r}; expected one of {valid}")


class LiveCursor:
    """Maps wall-clock time onto stored virtual time at a speed multiplier."""

    def __init__(self, store: FrameStore, speed: float = 1.0, clock=time.monotonic):
        if speed <= 0:
            raise ValueError("live replay speed must be positive")
        self.store = store
        self.speed = speed
        self.clock = clock
        self._epoch = clock()

    def virtual_now(self, building_id: str) -> float:
        try:
            timestamps = self.store.timestamps(building_id)
        except UnknownBuildingError:
            timestamps = []
        if not timestamps:
            raise NoFramesError(f"no frames stored for building {building_id!r}")
        return timestamps[0] + (self.clock() - self._epoch) * self.speed


def create_app(
    store: FrameStore,
    models: dict[str, BuildingModel],
    *,
    live_speed: float = 1.0,
    defaults: SceneOptions | None = None,
) -> FastAPI:
    app = FastAPI(title="thermal map service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )
    base = defaults or SceneOptions()
    live = LiveCursor(store, speed=live_speed)

    def model_for(building_id: str) -> BuildingModel:
        model = models.get(building_id)
        if model is None:
            raise HTTPException(status_code=404, detail=f"unknown building {building_id!r}")
        return model

    def scene_options(
        layer: str,
        walls: str,
        vx: float | None,
        vy: float | None,
        vz: float | None,
        primitive: str | None,
        spacing: float | None,
        detail_radius: float | None,
        mid_radius: float | None,
    ) -> SceneOptions:
        coords = (vx, vy, vz)
        viewpoint = None
        if any(c is not None for c in coords):
            if any(c is None for c in coords):
                raise HTTPException(
                    status_code=400, detail="viewpoint needs all three of vx, vy, vz"
                )
            viewpoint = (vx, vy, vz)
        kind = base.primitive
        if primitive is not None:
            kind = _parse_enum(PrimitiveKind, primitive, _PRIMITIVE_ALIASES, "primitive")
        try:
            return SceneOptions(
                primitive=kind,
                layer=_parse_enum(Layer, layer, {}, "layer"),
                walls=_parse_enum(WallMode, walls, _WALL_ALIASES, "walls"),
                cell_spacing=spacing if spacing is not None else base.cell_spacing,
                color_map=base.color_map,
                viewpoint=viewpoint,
                detail_radius=detail_radius if detail_radius is not None else base.detail_radius,
                mid_radius=mid_radius if mid_radius is not None else base.mid_radius,
                alpha=base.alpha,
                max_nominal_polygons=base.max_nominal_polygons,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    def scene_response(frame, model, opts: SceneOptions) -> Response:
        generator = generate_scene if opts.viewpoint is None else view_dependent_scene
        doc = generator(frame, model, opts)
        return Response(
            content=serialize_x3d(doc),
            media_type=X3D_MEDIA_TYPE,
            headers={
                "X-Frame-Timestamp": json.dumps(frame.t),
                "X-Nominal-Polygons": str(doc.nominal_polygons),
            },
        )

    @app.get("/buildings")
    def list_buildings() -> list[str]:
        return store.buildings()

    @app.get("/buildings/{building_id}/frames")
    def frames(
        building_id: str,
        from_t: float | None = Query(default=None, alias="from"),
        to_t: float | None = Query(default=None, alias="to"),
    ):
        timestamps = _timestamps(building_id)
        t0 = from_t if from_t is not None else (timestamps[0] if timestamps else 0.0)
        t1 = to_t if to_t is not None else (timestamps[-1] if timestamps else 0.0)
        try:
            result = store.query_range(building_id, t0, t1)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return [frame.to_dict() for frame in result]

    def _timestamps(building_id: str) -> list[float]:
        try:
            return store.timestamps(building_id)
        except UnknownBuildingError:
            raise HTTPException(status_code=404, detail=f"unknown building {building_id!r}")

    @app.get("/buildings/{building_id}/scene")
    def scene(
        building_id: str,
        t: float | None = None,
        layer: str = "temperature",
        walls: str = "flat_translucent",
        vx: float | None = None,
        vy: float | None = None,
        vz: float | None = None,
        primitive: str | None = None,
        spacing: float | None = None,
        detail_radius: float | None = None,
        mid_radius: float | None = None,
    ) -> Response:
        model = model_for(building_id)
        _timestamps(building_id)
        try:
            frame = store.latest(building_id) if t is None else store.nearest(building_id, t)
        except NoFramesError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        opts = scene_options(
            layer, walls, vx, vy, vz, primitive, spacing, detail_radius, mid_radius
        )
        return scene_response(frame, model, opts)

    @app.get("/buildings/{building_id}/live/scene")
    def live_scene(
        building_id: str,
        layer: str = "temperature",
        walls: str = "flat_translucent",
        vx: float | None = None,
        vy: float | None = None,
        vz: float | None = None,
        primitive: str | None = None,
        spacing: float | None = None,
        detail_radius: float | None = None,
        mid_radius: float | None = None,
    ) -> Response:
        model = model_for(building_id)
        _timestamps(building_id)
        try:
            frame = store.latest_at(building_id, live.virtual_now(building_id))
        except NoFramesError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        opts = scene_options(
            layer, walls, vx, vy, vz, primitive, spacing, detail_radius, mid_radius
        )
        return scene_response(frame, model, opts)

    @app.get("/buildings/{building_id}/playback")
    def playback_plan(
        building_id: str,
        from_t: float | None = Query(default=None, alias="from"),
        to_t: float | None = Query(default=None, alias="to"),
        speed: float = 1.0,
    ):
        timestamps = _timestamps(building_id)
        if not timestamps:
            raise HTTPException(status_code=404, detail="no frames stored")
        t0 = from_t if from_t is not None else timestamps[0]
        t1 = to_t if to_t is not None else timestamps[-1]
        try:
            plan = playback(store, building_id, t0, t1, speed)
        except NoFramesError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "building_id": plan.building_id,
            "t0": plan.t0,
            "t1": plan.t1,
            "speed": plan.speed,
            "frames": [
                {"t": t, "url": f"/buildings/{building_id}/scene?t={t}"}
                for t in plan.frame_times
            ],
            "presentation_times": list(plan.presentation_times),
        }

    @app.get("/buildings/{building_id}/legend")
    def legend_json(building_id: str, layer: str = "temperature"):
        model_for(building_id)
        opts = SceneOptions(
            layer=_parse_enum(Layer, layer, {}, "layer"), color_map=base.color_map
        )
        return legend(opts)

    return app


def load_service_dir(out_dir) -> tuple[FrameStore, dict[str, BuildingModel]]:
    """Open a simulation output directory: its store and building models."""
    from pathlib import Path

    out_dir = Path(out_dir)
    store = FrameStore(out_dir / "store")
    models: dict[str, BuildingModel] = {}
    for path in sorted(out_dir.glob("building*.json")):
        raw = json.loads(path.read_text(encoding="utf-8"))
        model = building_from_dict(raw.get("building", raw))
        models[model.id] = model
    return store, models
