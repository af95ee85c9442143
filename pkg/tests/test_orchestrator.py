import json

import pytest

from thermomap.field import FieldScenario, Hotspot, scenario_to_dict
from thermomap.geometry import ConfigError, PlacementStrategy, load_building
from thermomap.orchestrator import (
    BANDWIDTH_BUDGET_BPS,
    RunConfig,
    SimulationRig,
    VirtualClock,
    config_from_dict,
    load_config,
    resolve_scenario,
    run_simulation,
    scene_options_from_dict,
)
from thermomap.scenegen import FogType, Layer, PrimitiveKind, WallMode
from thermomap.supervisor import FrameStore
from thermomap.x3d import ALLOWED_TAGS, parse_x3d, used_tags

from conftest import grid_building_config, single_room_config


def one_room_raw():
    return json.loads(single_room_config())


def small_config(tmp_path, **overrides):
    cfg = config_from_dict(one_room_raw(), tmp_path, tmp_path / "out")
    defaults = dict(cadence=1.0, duration=10.0, seed=7)
    defaults.update(overrides)
    import dataclasses

    return dataclasses.replace(cfg, **defaults)


class TestVirtualClock:
    def test_monotone(self):
        clock = VirtualClock()
        clock.advance_to(5.0)
        clock.advance_to(5.0)
        assert clock.now == 5.0
        with pytest.raises(ValueError):
            clock.advance_to(4.9)


class TestRunConfig:
    def test_rejects_bad_cadence(self):
        with pytest.raises(ConfigError):
            RunConfig(building=one_room_raw()["building"], cadence=0.0)

    def test_rejects_short_duration(self):
        with pytest.raises(ConfigError, match="duration"):
            RunConfig(building=one_room_raw()["building"], cadence=60.0, duration=30.0)

    def test_rejects_bad_sample_period(self):
        with pytest.raises(ConfigError):
            RunConfig(building=one_room_raw()["building"], sample_period=-1.0)


class TestResolveScenario:
    def test_none_is_quiet_baseline(self):
        model = load_building(single_room_config())
        assert resolve_scenario(None, model) == FieldScenario()

    def test_named_preset(self):
        model = load_building(single_room_config())
        scenario = resolve_scenario("overheated_corner", model)
        assert len(scenario.hotspots) == 1
        assert scenario.hotspots[0].center == (0.3, 0.3, 2.7)

    def test_unknown_preset(self):
        model = load_building(single_room_config())
        with pytest.raises(ConfigError, match="preset"):
            resolve_scenario("volcano", model)

    def test_dict_round_trip(self):
        model = load_building(single_room_config())
        original = FieldScenario(
            baseline_temp=18.0,
            hotspots=(Hotspot(center=(1.0, 1.0, 1.0), amplitude_temp=3.0, amplitude_rh=0.0),),
        )
        assert resolve_scenario(scenario_to_dict(original), model) == original

    def test_wrong_type(self):
        model = load_building(single_room_config())
        with pytest.raises(ConfigError):
            resolve_scenario(42, model)


class TestSceneOptionsFromDict:
    def test_aliases(self):
        opts = scene_options_from_dict({"primitive": "tetra", "walls": "wire"})
        assert opts.primitive is PrimitiveKind.TETRAHEDRON
        assert opts.walls is WallMode.WIREFRAME
        opts = scene_options_from_dict({"walls": "flat"})
        assert opts.walls is WallMode.FLAT_TRANSLUCENT

    def test_full_round(self):
        opts = scene_options_from_dict(
            {
                "primitive": "box",
                "layer": "humidity",
                "cell_spacing": 0.5,
                "detail_radius": 10,
                "mid_radius": 40,
                "max_nominal_polygons": None,
                "viewpoint": [1, 2, 3],
                "fog": {"type": "exponential", "color": [1, 1, 1]},
            }
        )
        assert opts.layer is Layer.HUMIDITY
        assert opts.cell_spacing == 0.5
        assert opts.max_nominal_polygons is None
        assert opts.viewpoint == (1.0, 2.0, 3.0)
        assert opts.fog.kind is FogType.EXPONENTIAL
        assert opts.fog.color == (1.0, 1.0, 1.0)

    def test_bad_primitive(self):
        with pytest.raises((ConfigError, ValueError)):
            scene_options_from_dict({"primitive": "cone"})

    def test_bad_radii_become_config_error(self):
        with pytest.raises(ConfigError):
            scene_options_from_dict({"detail_radius": 50, "mid_radius": 10})


class TestConfigLoading:
    def test_inline_building(self, tmp_path):
        cfg = config_from_dict(one_room_raw(), tmp_path, tmp_path / "out")
        assert cfg.building["id"] == "one-room"
        assert cfg.strategy is PlacementStrategy.CORNERS8

    def test_building_path_indirection(self, tmp_path):
        (tmp_path / "bldg.json").write_text(
            json.dumps(one_room_raw()["building"]), encoding="utf-8"
        )
        raw = {"building_path": "bldg.json", "cadence": 30, "seed": 3}
        cfg = config_from_dict(raw, tmp_path, tmp_path / "out")
        assert cfg.building["id"] == "one-room"
        assert cfg.cadence == 30.0
        assert cfg.seed == 3

    def test_missing_building(self, tmp_path):
        with pytest.raises(ConfigError, match="building"):
            config_from_dict({"cadence": 60}, tmp_path, tmp_path / "out")

    def test_scenario_preset_in_config(self, tmp_path):
        raw = one_room_raw() | {"scenario": "cold_wet_corner"}
        cfg = config_from_dict(raw, tmp_path, tmp_path / "out")
        assert cfg.scenario.hotspots[0].amplitude_temp < 0

    def test_bad_strategy(self, tmp_path):
        with pytest.raises(ConfigError):
            config_from_dict(one_room_raw() | {"strategy": "random"}, tmp_path, tmp_path / "out")

    def test_load_config_reports_json_position(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"building": \n oops}', encoding="utf-8")
        with pytest.raises(ConfigError, match=r"line 2, column 2"):
            load_config(path, tmp_path / "out")

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json", tmp_path / "out")


class TestSimulationRig:
    def test_assembly(self, tmp_path):
        cfg = small_config(tmp_path)
        rig = SimulationRig(cfg)
        assert len(rig.endpoints) == 8  # corners8 on one room
        assert set(rig.concentrators) == {"r0"}
        assert set(rig.buses) == {0}
        assert sorted(rig.concentrators["r0"].roster) == list(range(8))

    def test_multiroom_addressing_is_per_room(self, tmp_path):
        raw = {"building": json.loads(grid_building_config("g", 2, 2, 1))["building"]}
        cfg = config_from_dict(raw, tmp_path, tmp_path / "out")
        rig = SimulationRig(cfg)
        assert len(rig.model.rooms) == 4
        for dc in rig.concentrators.values():
            assert sorted(dc.roster) == list(range(8))

    def test_traffic_accumulates(self, tmp_path):
        cfg = small_config(tmp_path)
        rig = SimulationRig(cfg)
        store = FrameStore(tmp_path / "store")
        from thermomap.supervisor import Supervisor

        sup = Supervisor(rig.model, rig.placements, store, poll_period=cfg.cadence)
        assert rig.bytes_transferred() == 0
        rig.run_cycle(1.0, sup)
        first = rig.bytes_transferred()
        assert first > 8 * 3 * 15  # at least the register traffic
        rig.run_cycle(2.0, sup)
        assert rig.bytes_transferred() > first


class TestRunSimulation:
    def test_frame_count_and_artifacts(self, tmp_path):
        cfg = small_config(tmp_path, duration=10.0, cadence=1.0)
        artifacts = run_simulation(cfg)
        assert artifacts.frame_count == 10
        out = artifacts.out_dir
        for name in ("building.json", "scene_final.x3d", "legend.json", "manifest.json"):
            assert (out / name).exists(), name
        store = FrameStore(artifacts.store_dir)
        assert store.frame_count("one-room") == 10
        assert store.timestamps("one-room") == [float(k) for k in range(1, 11)]

    def test_scene_artifact_is_valid(self, tmp_path):
        artifacts = run_simulation(small_config(tmp_path))
        doc = parse_x3d((artifacts.out_dir / "scene_final.x3d").read_text(encoding="utf-8"))
        assert used_tags(doc) <= ALLOWED_TAGS

    def test_manifest_contents(self, tmp_path):
        artifacts = run_simulation(small_config(tmp_path, seed=11))
        manifest = json.loads((artifacts.out_dir / "manifest.json").read_text())
        assert manifest["building_id"] == "one-room"
        assert manifest["frames"] == 10
        assert manifest["seed"] == 11
        assert manifest["bandwidth_bps"] == pytest.approx(artifacts.bandwidth_bps)
        assert set(manifest["files"]) >= {"building.json", "scene_final.x3d", "legend.json"}

    def test_same_seed_same_bytes(self, tmp_path):
        a = run_simulation(small_config(tmp_path / "a", seed=5))
        b = run_simulation(small_config(tmp_path / "b", seed=5))
        files_a = json.loads((a.out_dir / "manifest.json").read_text())["files"]
        files_b = json.loads((b.out_dir / "manifest.json").read_text())["files"]
        assert files_a == files_b

    def test_different_seed_different_frames(self, tmp_path):
        a = run_simulation(small_config(tmp_path / "a", seed=5))
        b = run_simulation(small_config(tmp_path / "b", seed=6))
        files_a = json.loads((a.out_dir / "manifest.json").read_text())["files"]
        files_b = json.loads((b.out_dir / "manifest.json").read_text())["files"]
        frame_files = [k for k in files_a if k.startswith("store/")]
        assert frame_files
        assert any(files_a[k] != files_b[k] for k in frame_files)

    def test_noise_off_matches_ground_truth(self, tmp_path):
        from thermomap.field import ground_truth

        cfg = small_config(tmp_path, noise=False)
        artifacts = run_simulation(cfg)
        store = FrameStore(artifacts.store_dir)
        frame = store.latest("one-room")
        for pos, temp, rh in frame.samples.values():
            t_true, rh_true = ground_truth(cfg.scenario, pos, frame.t)
            assert temp == pytest.approx(t_true, abs=0.005)  # quantization only
            assert rh == pytest.approx(rh_true, abs=0.005)

    def test_bandwidth_within_budget(self, tmp_path):
        artifacts = run_simulation(small_config(tmp_path))
        assert 0 < artifacts.bandwidth_bps < BANDWIDTH_BUDGET_BPS

    def test_rerun_into_same_out_dir_is_clean(self, tmp_path):
        first = run_simulation(small_config(tmp_path))
        second = run_simulation(small_config(tmp_path))
        assert second.frame_count == first.frame_count == 10
        files_a = json.loads((first.out_dir / "manifest.json").read_text())["files"]
        files_b = json.loads((second.out_dir / "manifest.json").read_text())["files"]
        assert files_a == files_b

    def test_scene_overrides_apply(self, tmp_path):
        cfg = small_config(tmp_path)
        import dataclasses

        cfg = dataclasses.replace(cfg, scene={"primitive": "billboard"})
        artifacts = run_simulation(cfg)
        manifest = json.loads((artifacts.out_dir / "manifest.json").read_text())
        assert manifest["scene"]["primitive"] == "billboard"
        text = (artifacts.out_dir / "scene_final.x3d").read_text(encoding="utf-8")
        assert "Billboard" in text and "Sphere" not in text
