import numpy as np
import pytest

from v2vsounder import scenario as sc

from conftest import make_scene, scene_text, vehicle_entry


class TestLoadScenario:
    def test_minimal_two_vehicle_config(self):
        scene = make_scene([vehicle_entry("tx-van", 50.0, 0.0),
                            vehicle_entry("rx-van", 0.0, 0.0)])
        assert len(scene.vehicles) == 2
        assert len(scene.panels) == 0
        assert scene.tx_vehicle.role == "tx"
        assert scene.rx_vehicle.role == "rx"

    def test_duplicate_vehicle_id_named_in_error(self):
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0),
                           vehicle_entry("rx-van", 0.0, 0.0),
                           vehicle_entry("rx-van", 5.0, 5.0)])
        with pytest.raises(sc.ScenarioError, match="duplicate vehicle id 'rx-van'"):
            sc.load_scenario(text)

    def test_unknown_vehicle_reference(self):
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0),
                           vehicle_entry("rx-van", 0.0, 0.0)], tx="ghost")
        with pytest.raises(sc.ScenarioError, match="tx_vehicle.*ghost"):
            sc.load_scenario(text)

    def test_negative_dimension_names_path(self):
        bad = vehicle_entry("rx-van", 0.0, 0.0)
        bad["length_m"] = -4.0
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0), bad])
        with pytest.raises(sc.ScenarioError, match=r"vehicles\[1\].length_m"):
            sc.load_scenario(text)

    def test_parse_error_carries_location(self):
        with pytest.raises(sc.ScenarioError, match="line"):
            sc.load_scenario("vehicles:\n  - id: [unclosed\n")

    def test_unknown_top_level_key(self):
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0),
                           vehicle_entry("rx-van", 0.0, 0.0)])
        with pytest.raises(sc.ScenarioError, match="unknown top-level"):
            sc.load_scenario(text + "\nweather: rain\n")

    def test_ground_bounce_hook_stays_disabled(self):
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0),
                           vehicle_entry("rx-van", 0.0, 0.0)],
                          channel={"ground_bounce": True})
        with pytest.raises(sc.ScenarioError, match="ground_bounce"):
            sc.load_scenario(text)

    def test_hash_is_pure_function_of_text(self):
        text = scene_text([vehicle_entry("tx-van", 50.0, 0.0),
                           vehicle_entry("rx-van", 0.0, 0.0)])
        assert sc.load_scenario(text).config_hash == sc.load_scenario(text).config_hash
        other = sc.load_scenario(text + "\n")
        assert other.config_hash != sc.load_scenario(text).config_hash

    def test_waveguide_preset_structure(self):
        scene = sc.load_scenario(sc.preset_text("waveguide"))
        assert scene.name == "waveguide"
        assert {v.role for v in scene.vehicles} == {"tx", "rx", "traffic"}
        # Reflector row sits on the left (positive y); right side is open.
        assert all(p.p0_m[1] > 0 and p.p1_m[1] > 0 for p in scene.panels)
        assert len(scene.panels) == 1

    def test_unknown_preset(self):
        with pytest.raises(sc.ScenarioError, match="unknown preset"):
            sc.preset_text("nope")


class TestSampleTrack:
    def test_knot_is_exact(self):
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        pose = sc.sample_track(track, float(track.times_s[3]))
        np.testing.assert_allclose(pose.position_m, track.positions_m[3])

    def test_constant_velocity_midpoint(self):
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        t = (float(track.times_s[4]) + float(track.times_s[5])) / 2.0
        pose = sc.sample_track(track, t)
        assert pose.position_m[0] == pytest.approx(10.0 * t)

    def test_60mph_track_speed(self):
        v = 26.8224  # 60 mph
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 10.0 * v, 0.0)])
        for t in (0.1, 3.7, 9.0):
            pose = sc.sample_track(track, t)
            assert np.linalg.norm(pose.velocity_mps) == pytest.approx(v)

    def test_outside_span_rejected(self):
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        with pytest.raises(ValueError):
            sc.sample_track(track, -0.1)
        with pytest.raises(ValueError):
            sc.sample_track(track, 1e6)

    def test_default_rate_14hz(self):
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        assert track.rate_hz == 14.0
        assert np.allclose(np.diff(track.times_s), 1.0 / 14.0)


class TestDriveStats:
    def test_identical_tracks(self):
        track = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        stats = sc.drive_stats(track, track)
        assert np.all(stats.separation_m == 0.0)
        assert np.all(stats.range_rate_mps == 0.0)

    def test_separation_symmetric(self):
        a = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 100.0, 0.0)])
        b = sc.track_from_waypoints([(0.0, 30.0, 5.0), (10.0, 80.0, 5.0)])
        fwd = sc.drive_stats(a, b)
        rev = sc.drive_stats(b, a)
        np.testing.assert_allclose(fwd.separation_m, rev.separation_m)

    def test_range_rate_sign(self):
        # Receiver driving away from a parked transmitter: opening, positive.
        tx = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 0.0, 0.0)])
        rx = sc.track_from_waypoints([(0.0, 10.0, 0.0), (10.0, 110.0, 0.0)])
        stats = sc.drive_stats(tx, rx)
        assert np.all(stats.range_rate_mps[1:] > 0)

    def test_no_overlap_rejected(self):
        a = sc.track_from_waypoints([(0.0, 0.0, 0.0), (1.0, 1.0, 0.0)])
        b = sc.track_from_waypoints([(5.0, 0.0, 0.0), (6.0, 1.0, 0.0)])
        with pytest.raises(ValueError, match="overlap"):
            sc.drive_stats(a, b)


class TestReferenceDrive:
    def setup_method(self):
        self.tx, self.rx = sc.reference_drive_tracks()

    def test_route_aggregates(self):
        # 14.3 miles at an average of 20 mph: 23.01 km over ~43 minutes.
        distance = float(self.rx.positions_m[-1, 0] - self.rx.positions_m[0, 0])
        assert distance == pytest.approx(23013.6, rel=1e-3)
        duration_min = (self.rx.times_s[-1] - self.rx.times_s[0]) / 60.0
        assert duration_min == pytest.approx(42.9, abs=0.5)
        avg = distance / float(self.rx.times_s[-1] - self.rx.times_s[0])
        assert avg == pytest.approx(8.9408, rel=1e-3)

    def test_peak_speed_60mph(self):
        stats = sc.drive_stats(self.tx, self.rx)
        assert np.max(stats.rx_speed_mps) == pytest.approx(26.8224, rel=5e-3)

    def test_max_separation_exactly_250(self):
        stats = sc.drive_stats(self.tx, self.rx)
        assert np.max(stats.separation_m) == pytest.approx(250.0, abs=1e-6)
        assert np.min(stats.separation_m) >= 19.0


class TestDriveStatsCsv:
    def test_export_schema(self, tmp_path):
        import io

        tx = sc.track_from_waypoints([(0.0, 30.0, 0.0), (10.0, 130.0, 0.0)])
        rx = sc.track_from_waypoints([(0.0, 0.0, 0.0), (10.0, 90.0, 0.0)])
        stats = sc.drive_stats(tx, rx)
        buffer = io.StringIO()
        sc.write_drive_stats_csv(stats, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "gps_time_s,separation_m,rx_speed_mps,range_rate_mps"
        assert len(lines) == len(stats.times_s) + 1
        first = lines[1].split(",")
        assert float(first[1]) == pytest.approx(30.0)


class TestGpsImport:
    def test_eastward_track(self):
        rows = ["time,lat,lon,alt,speed,heading"]
        for i in range(5):
            rows.append(f"{i/14.0:.6f},30.0,{-97.0 + i * 1e-5:.6f},150.0,10.0,90.0")
        track = sc.import_gps_csv("\n".join(rows))
        assert len(track.times_s) == 5
        assert track.positions_m[-1, 0] > track.positions_m[0, 0]
        np.testing.assert_allclose(track.positions_m[:, 1], 0.0, atol=1e-6)
        np.testing.assert_allclose(track.velocities_mps[:, 0], 10.0, atol=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(sc.ScenarioError, match="no data rows"):
            sc.import_gps_csv("time,lat,lon,alt,speed,heading\n")
