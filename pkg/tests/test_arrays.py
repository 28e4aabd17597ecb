import numpy as np
import pytest

from v2vsounder import arrays as ar


class _Vehicle:
    def __init__(self, length_m, width_m, role):
        self.length_m = length_m
        self.width_m = width_m
        self.role = role


class TestCodebook:
    def setup_method(self):
        self.codebook = ar.build_rx_codebook(ar.rx_array_spec())

    def test_29_beams(self):
        assert len(self.codebook) == 29

    def test_row_layout(self):
        assert len(self.codebook.elevation_row(0.0)) == 11
        assert len(self.codebook.elevation_row(20.0)) == 9
        assert len(self.codebook.elevation_row(-20.0)) == 9

    def test_coverage_bounds(self):
        for beam in self.codebook.beams:
            assert -45.0 <= beam.azimuth_deg <= 45.0
            assert -30.0 <= beam.elevation_deg <= 30.0

    def test_deterministic_ordering(self):
        keys = [(b.elevation_deg, b.azimuth_deg) for b in self.codebook.beams]
        assert keys == sorted(keys)
        assert [b.index for b in self.codebook.beams] == list(range(29))

    def test_four_arrays_cover_360(self):
        boresights = (45.0, -45.0, 135.0, -135.0)
        world = sorted({round((bs + b.azimuth_deg) % 360.0, 6)
                        for bs in boresights
                        for b in self.codebook.elevation_row(0.0)})
        # 4 x 11 azimuth-cut beams with shared sector edges: gaps never
        # exceed the 9 degree beam spacing anywhere on the circle.
        gaps = np.diff(world + [world[0] + 360.0])
        assert len(boresights) * len(self.codebook) == 116
        assert np.max(gaps) <= 9.0 + 1e-9


class TestTxBeams:
    def test_beamwidth_and_height(self):
        pairs = ar.build_tx_beams()
        assert len(pairs) == 2
        for beam, placement in pairs:
            assert beam.beamwidth_3db_deg == 55.0
            assert placement.height_m == pytest.approx(0.381)
            assert placement.position_m[2] == pytest.approx(0.381)

    def test_mirror_symmetric_headings(self):
        (_, left), (_, right) = ar.build_tx_beams()
        assert left.boresight_heading_deg == -right.boresight_heading_deg
        np.testing.assert_allclose(left.position_m[1], -right.position_m[1])


class TestBeamGain:
    def test_boresight_composite_gain(self):
        spec = ar.tx_array_spec()
        beam = ar.Beam(0.0, 0.0, 55.0, 0)
        assert ar.beam_gain(spec, beam, 0.0, 0.0) == pytest.approx(59.1)

    def test_minus_3db_at_half_beamwidth(self):
        spec = ar.tx_array_spec()
        beam = ar.Beam(0.0, 0.0, 55.0, 0)
        gain = ar.beam_gain(spec, beam, 27.5, 0.0)
        assert gain == pytest.approx(59.1 - 3.0, abs=0.01)

    def test_sidelobe_floor(self):
        spec = ar.tx_array_spec()
        beam = ar.Beam(0.0, 0.0, 55.0, 0)
        assert ar.beam_gain(spec, beam, 180.0, 0.0) == pytest.approx(59.1 - 25.0)

    def test_monotone_and_symmetric(self):
        spec = ar.rx_array_spec()
        beam = ar.Beam(0.0, 0.0, 13.0, 0)
        offsets = np.arange(0.0, 90.0, 0.5)
        gains = [ar.beam_gain(spec, beam, o, 0.0) for o in offsets]
        assert all(g1 >= g2 - 1e-12 for g1, g2 in zip(gains, gains[1:]))
        for offset in (3.0, 7.5, 20.0):
            left = ar.beam_gain(spec, beam, -offset, 0.0)
            right = ar.beam_gain(spec, beam, offset, 0.0)
            assert left == pytest.approx(right, abs=1e-12)

    def test_argmax_on_degree_grid_is_boresight(self):
        spec = ar.rx_array_spec()
        for beam in ar.build_rx_codebook(spec).beams[::7]:
            grid = np.arange(-60.0, 60.5, 1.0)
            gains = [ar.beam_gain(spec, beam, az, beam.elevation_deg) for az in grid]
            best = grid[int(np.argmax(gains))]
            assert abs(best - beam.azimuth_deg) <= 0.5 + 1e-9

    def test_upa_factor_model(self):
        spec = ar.ArraySpec(64, 47.0, pattern_model="upa-factor")
        beam = ar.Beam(0.0, 0.0, 13.0, 0)
        assert ar.beam_gain(spec, beam, 0.0, 0.0) == pytest.approx(47.0)
        assert ar.beam_gain(spec, beam, 30.0, 0.0) < 47.0 - 3.0


class TestMountArrays:
    def test_rx_four_corners(self):
        placements = ar.mount_arrays(_Vehicle(4.57, 1.9, "rx"))
        assert [p.name for p in placements] == [
            "front-left", "front-right", "rear-left", "rear-right"]
        assert sorted(p.boresight_heading_deg % 360 for p in placements) == \
            [45.0, 135.0, 225.0, 315.0]
        for p in placements:
            assert p.position_m[2] == pytest.approx(0.381)

    def test_front_rear_separation_equals_length(self):
        placements = {p.name: p for p in ar.mount_arrays(_Vehicle(4.57, 1.9, "rx"))}
        gap = np.linalg.norm(placements["front-left"].position_m
                             - placements["rear-left"].position_m)
        assert gap == pytest.approx(4.57)

    def test_tx_two_rear_corners(self):
        placements = ar.mount_arrays(_Vehicle(4.57, 1.9, "tx"))
        assert len(placements) == 2
        assert all(p.position_m[0] < 0 for p in placements)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            ar.mount_arrays(_Vehicle(-1.0, 1.9, "rx"))
        with pytest.raises(ValueError):
            ar.mount_arrays(_Vehicle(4.57, 1.9, "traffic"))
