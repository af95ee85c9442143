import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermomap.field import (
    AlphaRamp,
    ColorMap,
    Diurnal,
    ExtrapolationError,
    FieldScenario,
    Hotspot,
    ReconstructionField,
    ReconstructionMethod,
    SensorSample,
    alpha_for_distance,
    color_for,
    ground_truth,
    reconstruct,
    scenario_from_dict,
    scenario_to_dict,
)
from thermomap.geometry import room_cell_grid

from conftest import make_room


# --- independent oracle: global nodal hat-basis sum, written before the
# implementation path it checks and kept deliberately different from it ---

def _hat(coords, i, v):
    if i > 0 and coords[i - 1] <= v <= coords[i]:
        return (v - coords[i - 1]) / (coords[i] - coords[i - 1])
    if i < len(coords) - 1 and coords[i] <= v <= coords[i + 1]:
        return (coords[i + 1] - v) / (coords[i + 1] - coords[i])
    return 0.0


def trilinear_oracle(xs, ys, zs, values, p):
    total = 0.0
    for i in range(len(xs)):
        wx = _hat(xs, i, p[0])
        if wx == 0.0:
            continue
        for j in range(len(ys)):
            wy = _hat(ys, j, p[1])
            if wy == 0.0:
                continue
            for k in range(len(zs)):
                wz = _hat(zs, k, p[2])
                if wz == 0.0:
                    continue
                total += values[(i, j, k)] * wx * wy * wz
    return total


def grid_field(xs, ys, zs, temp_of, rh_of, method=ReconstructionMethod.LINEAR_GRID):
    samples = []
    n = 0
    for x in xs:
        for y in ys:
            for z in zs:
                samples.append(
                    (
                        (x, y, z),
                        SensorSample(f"s{n}", 0.0, temp_of(x, y, z), rh_of(x, y, z)),
                    )
                )
                n += 1
    return ReconstructionField(method=method, samples=samples)


class TestGroundTruth:
    def test_constant_field(self):
        sc = FieldScenario(baseline_temp=20.0, baseline_rh=50.0)
        for p in [(0, 0, 0), (3.7, -2, 12)]:
            for t in [0.0, 1e6]:
                assert ground_truth(sc, p, t) == (20.0, 50.0)

    def test_kernel_peak(self):
        c = (1.0, 2.0, 1.5)
        sc = FieldScenario(hotspots=(Hotspot(center=c, amplitude_temp=10.0),))
        temp, _ = ground_truth(sc, c, 0.0)
        assert temp == 20.0 + 10.0

    def test_value_at_one_sigma(self):
        # Analytic: amplitude * exp(-0.5) at distance sigma from the center.
        sigma = 1.3
        c = (0.0, 0.0, 0.0)
        sc = FieldScenario(
            hotspots=(Hotspot(center=c, amplitude_temp=10.0, sigma=sigma),)
        )
        temp, _ = ground_truth(sc, (sigma, 0.0, 0.0), 0.0)
        assert math.isclose(temp, 20.0 + 10.0 * math.exp(-0.5), rel_tol=1e-12)

    def test_diurnal_peak_at_quarter_period(self):
        sc = FieldScenario(diurnal=Diurnal(amplitude=2.0, period=86400.0))
        temp, rh = ground_truth(sc, (0, 0, 0), 86400.0 / 4)
        assert math.isclose(temp, 22.0, rel_tol=1e-12)
        assert rh == 50.0

    def test_onset_and_decay(self):
        h = Hotspot(center=(0, 0, 0), amplitude_temp=10.0, onset=100.0, decay=50.0)
        sc = FieldScenario(hotspots=(h,))
        assert ground_truth(sc, (0, 0, 0), 99.0)[0] == 20.0
        assert ground_truth(sc, (0, 0, 0), 100.0)[0] == 30.0
        t150, _ = ground_truth(sc, (0, 0, 0), 150.0)
        assert math.isclose(t150, 20.0 + 10.0 * math.exp(-1.0), rel_tol=1e-12)

    @given(
        amp=st.floats(-200, 200),
        x=st.floats(-5, 5),
        t=st.floats(0, 1e5),
    )
    @settings(max_examples=100)
    def test_rh_always_clamped(self, amp, x, t):
        sc = FieldScenario(
            hotspots=(Hotspot(center=(0, 0, 0), amplitude_rh=amp, sigma=2.0),)
        )
        _, rh = ground_truth(sc, (x, 0, 0), t)
        assert 0.0 <= rh <= 100.0

    def test_argmax_on_cell_grid_is_nearest_cell(self):
        room = make_room()
        hotspot = Hotspot(center=(0.6, 3.1, 2.2), amplitude_temp=9.0, sigma=1.0)
        sc = FieldScenario(hotspots=(hotspot,))
        centers = room_cell_grid(room, 0.5)
        hottest = max(centers, key=lambda c: ground_truth(sc, c, 0.0)[0])
        nearest = min(centers, key=lambda c: math.dist(c, hotspot.center))
        assert hottest == nearest

    def test_scenario_dict_round_trip(self):
        sc = FieldScenario(
            baseline_temp=21.0,
            baseline_rh=40.0,
            hotspots=(Hotspot(center=(1, 2, 3), amplitude_temp=5.0, sigma=0.8),),
            diurnal=Diurnal(amplitude=1.5, period=3600.0),
        )
        assert scenario_from_dict(scenario_to_dict(sc)) == sc


class TestReconstructLinear:
    def test_exact_at_sample_sites(self):
        fld = grid_field(
            [0.0, 1.0], [0.0, 1.0], [0.0, 1.0],
            lambda x, y, z: 20 + x + 2 * y + 3 * z,
            lambda x, y, z: 50 - 5 * x,
        )
        for pos, sample in fld.samples:
            temp, rh = reconstruct(fld, pos)
            assert math.isclose(temp, sample.temp, abs_tol=1e-12)
            assert math.isclose(rh, sample.rh, abs_tol=1e-12)

    def test_midpoint_between_two_sensors(self):
        samples = [
            ((0.0, 0.0, 0.0), SensorSample("a", 0.0, 20.0, 40.0)),
            ((1.0, 0.0, 0.0), SensorSample("b", 0.0, 30.0, 60.0)),
        ]
        fld = ReconstructionField(ReconstructionMethod.LINEAR_GRID, samples)
        temp, rh = reconstruct(fld, (0.5, 0.0, 0.0))
        assert temp == 25.0
        assert rh == 50.0

    def test_matches_brute_force_oracle(self):
        rng = random.Random(20260816)
        xs, ys, zs = [0.0, 1.5, 4.0], [0.0, 2.0, 4.0], [0.0, 1.0, 3.0]
        temps = {}
        rhs = {}
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    temps[(i, j, k)] = rng.uniform(10, 30)
                    rhs[(i, j, k)] = rng.uniform(30, 70)

        def t_of(x, y, z):
            return temps[(xs.index(x), ys.index(y), zs.index(z))]

        def r_of(x, y, z):
            return rhs[(xs.index(x), ys.index(y), zs.index(z))]

        fld = grid_field(xs, ys, zs, t_of, r_of)
        for _ in range(100):
            p = (rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 3))
            temp, rh = reconstruct(fld, p)
            assert abs(temp - trilinear_oracle(xs, ys, zs, temps, p)) <= 1e-9
            assert abs(rh - trilinear_oracle(xs, ys, zs, rhs, p)) <= 1e-9

    def test_extrapolation_rejected(self):
        fld = grid_field(
            [0.0, 1.0], [0.0, 1.0], [0.0, 1.0],
            lambda *_: 20.0, lambda *_: 50.0,
        )
        with pytest.raises(ExtrapolationError):
            reconstruct(fld, (1.5, 0.5, 0.5))

    def test_incomplete_lattice_rejected(self):
        samples = [
            ((0.0, 0.0, 0.0), SensorSample("a", 0.0, 20.0, 50.0)),
            ((1.0, 0.0, 0.0), SensorSample("b", 0.0, 21.0, 50.0)),
            ((0.0, 1.0, 0.0), SensorSample("c", 0.0, 22.0, 50.0)),
        ]
        with pytest.raises(ValueError, match="complete rectangular grid"):
            ReconstructionField(ReconstructionMethod.LINEAR_GRID, samples)

    @given(
        px=st.floats(0, 1), py=st.floats(0, 1), pz=st.floats(0, 1),
        temps=st.lists(st.floats(5, 40), min_size=8, max_size=8),
    )
    @settings(max_examples=60)
    def test_bounded_by_sample_range(self, px, py, pz, temps):
        it = iter(temps)
        fld = grid_field(
            [0.0, 1.0], [0.0, 1.0], [0.0, 1.0],
            lambda x, y, z: next(it), lambda x, y, z: 50.0,
        )
        temp, _ = reconstruct(fld, (px, py, pz))
        assert min(temps) - 1e-9 <= temp <= max(temps) + 1e-9


class TestReconstructBell:
    def _scatter(self, rng, n=10):
        samples = []
        for i in range(n):
            pos = (rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 3))
            samples.append(
                (pos, SensorSample(f"s{i}", 0.0, rng.uniform(12, 28), rng.uniform(35, 65)))
            )
        return ReconstructionField(ReconstructionMethod.BELL_KERNEL, samples)

    def test_snap_at_sample_sites(self):
        rng = random.Random(7)
        fld = self._scatter(rng)
        for pos, sample in fld.samples:
            assert reconstruct(fld, pos) == (sample.temp, sample.rh)

    def test_snap_within_epsilon(self):
        samples = [
            ((0.0, 0.0, 0.0), SensorSample("a", 0.0, 20.0, 50.0)),
            ((2.0, 0.0, 0.0), SensorSample("b", 0.0, 30.0, 60.0)),
        ]
        fld = ReconstructionField(ReconstructionMethod.BELL_KERNEL, samples)
        assert reconstruct(fld, (0.004, 0.0, 0.0)) == (20.0, 50.0)

    def test_bounded_by_sample_range(self):
        rng = random.Random(99)
        fld = self._scatter(rng)
        temps = [s.temp for _, s in fld.samples]
        rhs = [s.rh for _, s in fld.samples]
        for _ in range(1000):
            p = (rng.uniform(-1, 5), rng.uniform(-1, 5), rng.uniform(-1, 4))
            temp, rh = reconstruct(fld, p)
            assert min(temps) - 1e-9 <= temp <= max(temps) + 1e-9
            assert min(rhs) - 1e-9 <= rh <= max(rhs) + 1e-9

    def test_default_kernel_sigma_from_spacing(self):
        samples = [
            ((0.0, 0.0, 0.0), SensorSample("a", 0.0, 20.0, 50.0)),
            ((2.0, 0.0, 0.0), SensorSample("b", 0.0, 30.0, 60.0)),
        ]
        fld = ReconstructionField(ReconstructionMethod.BELL_KERNEL, samples)
        assert fld.kernel_sigma == 1.0  # half the mean nearest-neighbor gap

    def test_far_query_does_not_blow_up(self):
        samples = [
            ((0.0, 0.0, 0.0), SensorSample("a", 0.0, 20.0, 50.0)),
            ((1.0, 0.0, 0.0), SensorSample("b", 0.0, 22.0, 55.0)),
        ]
        fld = ReconstructionField(ReconstructionMethod.BELL_KERNEL, samples)
        temp, rh = reconstruct(fld, (500.0, 0.0, 0.0))
        assert 20.0 <= temp <= 22.0
        assert 50.0 <= rh <= 55.0


class TestColorMap:
    def test_endpoints_midpoint_clamp(self):
        cmap = ColorMap(15.0, 35.0)
        assert color_for(15.0, cmap) == (0.0, 0.0, 1.0)
        assert color_for(25.0, cmap) == (0.5, 0.0, 0.5)
        assert color_for(40.0, cmap) == (1.0, 0.0, 0.0)
        assert color_for(-100.0, cmap) == (0.0, 0.0, 1.0)

    def test_invalid_range_rejected(self):
        with pytest.raises(ValueError):
            ColorMap(35.0, 15.0)

    @given(v1=st.floats(-50, 100), v2=st.floats(-50, 100))
    @settings(max_examples=100)
    def test_monotone(self, v1, v2):
        cmap = ColorMap(15.0, 35.0)
        lo, hi = sorted((v1, v2))
        c_lo, c_hi = color_for(lo, cmap), color_for(hi, cmap)
        assert c_lo[0] <= c_hi[0]
        assert c_lo[2] >= c_hi[2]
        assert all(0.0 <= ch <= 1.0 for ch in c_lo + c_hi)


class TestAlpha:
    def test_near(self):
        assert alpha_for_distance(0.0) == 0.4

    def test_far_clamp(self):
        assert alpha_for_distance(50.0) == 0.85
        assert alpha_for_distance(400.0) == 0.85

    def test_midpoint(self):
        assert math.isclose(alpha_for_distance(25.0), 0.625, rel_tol=1e-12)

    @given(d1=st.floats(0, 200), d2=st.floats(0, 200))
    def test_monotone_nondecreasing(self, d1, d2):
        lo, hi = sorted((d1, d2))
        assert alpha_for_distance(lo) <= alpha_for_distance(hi) + 1e-15

    def test_custom_ramp(self):
        ramp = AlphaRamp(t_near=0.1, t_far=0.9, d_ref=10.0)
        assert math.isclose(alpha_for_distance(5.0, ramp), 0.5)
