"""Command-line entrypoint: simulate, serve, export-scene, validate.

Exit codes: 0 on success, 2 for configuration problems (bad files, bad
flags), 3 for runtime failures inside an otherwise valid run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from thermomap.geometry import ConfigError, PlacementStrategy
from thermomap.orchestrator import load_config, run_simulation, scene_options_from_dict
from thermomap.scenegen import generate_scene, legend, view_dependent_scene
from thermomap.supervisor import NoFramesError, UnknownBuildingError
from thermomap.validation import Tolerances, parse_plane, reconstruction_error
from thermomap.x3d import serialize_x3d

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermomap",
        description="Simulate a building thermal sensor network and render X3D maps.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a full acquisition simulation")
    sim.add_argument("--config", required=True, help="run config JSON")
    sim.add_argument("--duration", type=float, help="override duration (virtual s)")
    sim.add_argument("--cadence", type=float, help="override poll cadence (virtual s)")
    sim.add_argument("--seed", type=int, help="override RNG seed")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument(
        "--strategy", choices=[s.value for s in PlacementStrategy], help="sensor placement"
    )
    sim.add_argument(
        "--primitive",
        choices=["sphere", "box", "tetra", "billboard"],
        help="cell primitive for the exported scene",
    )
    sim.add_argument("--no-noise", action="store_true", help="disable measurement noise")

    srv = sub.add_parser("serve", help="serve a finished run over HTTP")
    srv.add_argument("--store", required=True, help="simulation output directory")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument(
        "--speed", type=float, default=1.0, help="live replay speed (virtual s per wall s)"
    )

    exp = sub.add_parser("export-scene", help="render one stored frame to X3D")
    exp.add_argument("--store", required=True, help="simulation output directory")
    exp.add_argument("--building", help="building id (default: the only one stored)")
    exp.add_argument("--t", type=float, help="frame timestamp (default: latest; nearest wins)")
    exp.add_argument("--viewpoint", help="x,y,z for view-dependent generation")
    exp.add_argument("--layer", choices=["temperature", "humidity"], default="temperature")
    exp.add_argument(
        "--walls", choices=["flat_translucent", "wireframe", "flat", "wire"],
        default="flat_translucent",
    )
    exp.add_argument("--primitive", choices=["sphere", "box", "tetra", "billboard"])
    exp.add_argument("--spacing", type=float, help="cell spacing in meters")
    exp.add_argument(
        "--detail-radius", type=float, help="full cell grids within this distance (m)"
    )
    exp.add_argument(
        "--mid-radius", type=float, help="aggregate boxes out to this distance (m)"
    )
    exp.add_argument("--out", required=True, help="output .x3d path")

    val = sub.add_parser("validate", help="compare reconstruction against ground truth")
    val.add_argument("--config", required=True, help="run config JSON (building + scenario)")
    val.add_argument("--plane", default="z=1.5", help="cross-section plane, e.g. z=1.5")
    val.add_argument("--res", default="256x256", help="raster resolution WxH")
    val.add_argument(
        "--spacings", default="2,1,0.5", help="comma-separated sensor spacings to sweep"
    )
    val.add_argument("--rms-tolerance", type=float, default=0.5)
    val.add_argument("--out", required=True, help="report JSON path")
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.out)
    overrides = {}
    if args.duration is not None:
        overrides["duration"] = args.duration
    if args.cadence is not None:
        overrides["cadence"] = args.cadence
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.strategy is not None:
        overrides["strategy"] = PlacementStrategy(args.strategy)
    if args.no_noise:
        overrides["noise"] = False
    if args.primitive is not None:
        scene = dict(cfg.scene)
        scene["primitive"] = args.primitive
        overrides["scene"] = scene
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    artifacts = run_simulation(cfg)
    print(
        f"simulated {artifacts.frame_count} frames "
        f"({artifacts.bandwidth_bps:.0f} bps) -> {artifacts.out_dir}"
    )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from thermomap.service import create_app, load_service_dir

    store, models = load_service_dir(args.store)
    if not models:
        raise ConfigError(f"no building.json found under {args.store}")
    app = create_app(store, models, live_speed=args.speed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _resolve_building(store, models, requested: str | None) -> str:
    ids = store.buildings()
    if requested is not None:
        if requested not in models:
            raise ConfigError(f"building {requested!r} not in store (have {ids})")
        return requested
    if len(ids) != 1:
        raise ConfigError(f"--building required when the store holds {ids}")
    return ids[0]


def _cmd_export_scene(args: argparse.Namespace) -> int:
    from thermomap.service import load_service_dir

    store, models = load_service_dir(args.store)
    building_id = _resolve_building(store, models, args.building)
    frame = store.latest(building_id) if args.t is None else store.nearest(building_id, args.t)
    raw: dict = {"layer": args.layer, "walls": args.walls}
    if args.primitive is not None:
        raw["primitive"] = args.primitive
    if args.spacing is not None:
        raw["cell_spacing"] = args.spacing
    if args.detail_radius is not None:
        raw["detail_radius"] = args.detail_radius
    if args.mid_radius is not None:
        raw["mid_radius"] = args.mid_radius
    if args.viewpoint is not None:
        try:
            x, y, z = (float(c) for c in args.viewpoint.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse viewpoint {args.viewpoint!r}; expected x,y,z")
        raw["viewpoint"] = [x, y, z]
    opts = scene_options_from_dict(raw)
    generator = generate_scene if opts.viewpoint is None else view_dependent_scene
    doc = generator(frame, models[building_id], opts)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_x3d(doc), encoding="utf-8")
    out.with_suffix(out.suffix + ".legend.json").write_text(
        json.dumps(legend(opts), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {out} (nominal polygons: {doc.nominal_polygons})")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    from thermomap.geometry import building_from_dict

    cfg = load_config(args.config, Path(args.out).parent)
    model = building_from_dict(cfg.building)
    try:
        plane = parse_plane(args.plane)
        w, h = (int(tok) for tok in args.res.lower().split("x"))
        spacings = [float(tok) for tok in args.spacings.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --plane, --res, or --spacings value: {exc}")
    if not spacings:
        raise ConfigError("--spacings must name at least one spacing")
    room = model.rooms[0]
    runs = []
    for spacing in spacings:
        tolerances = Tolerances(rms=args.rms_tolerance, hotspot_offset=spacing)
        report = reconstruction_error(
            room, cfg.scenario, spacing, plane, (w, h), tolerances=tolerances
        )
        runs.append({"spacing": spacing, **report.to_dict()})
    monotone = all(
        runs[i]["rms_error"] >= runs[i + 1]["rms_error"] for i in range(len(runs) - 1)
    )
    report_doc = {
        "building_id": model.id,
        "room_id": room.id,
        "plane": {"axis": plane.axis, "offset": plane.offset},
        "resolution": [w, h],
        "rms_tolerance": args.rms_tolerance,
        "runs": runs,
        "monotone_rms": monotone,
        "passed": monotone and runs[-1]["passed"],
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report_doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    status = "PASS" if report_doc["passed"] else "FAIL"
    print(f"{status}: final rms {runs[-1]['rms_error']:.4f} at spacing {spacings[-1]} -> {out}")
    return EXIT_OK if report_doc["passed"] else EXIT_RUNTIME


_COMMANDS = {
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
    "export-scene": _cmd_export_scene,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, UnknownBuildingError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NoFramesError as exc:
        log.error("runtime error: %s", exc)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps everything to codes
        log.error("runtime error: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
