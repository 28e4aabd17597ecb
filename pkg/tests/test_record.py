import hashlib
import random
from pathlib import Path

import numpy as np
import pytest

from v2vsounder import record
from v2vsounder.cli import _golden_frame

GOLDEN_SHA256 = "bd93f348aec2eb80622ee8faa3230302f1fb4e04f1e86870535bce55ee0d832d"


def random_frame(rng, sample_count=64):
    iq = rng.integers(-32767, 32768, size=2 * sample_count).astype(np.int16)
    return record.CaptureFrame(
        gps_seconds=int(rng.integers(0, 2**40)),
        gps_fraction_q64=record.ns_to_q64(int(rng.integers(0, 10**9))),
        rx_channel=int(rng.integers(0, 4)),
        slot_index=int(rng.integers(0, 29)),
        beam_index=int(rng.integers(0, 29)),
        calibration_dbm_fs=float(rng.normal()),
        iq=iq)


class TestFrameCodec:
    def test_2048_sample_frame_is_8232_bytes(self):
        frame = record.CaptureFrame(gps_seconds=0, gps_fraction_q64=0, rx_channel=0,
                                    slot_index=0, beam_index=0, calibration_dbm_fs=0.0,
                                    iq=np.zeros(4096, dtype=np.int16))
        assert record.frame_byte_size(2048) == 8232
        assert len(record.encode_frame(frame)) == 8232

    def test_golden_bytes_pinned(self):
        encoded = record.encode_frame(_golden_frame())
        assert hashlib.sha256(encoded).hexdigest() == GOLDEN_SHA256
        golden_path = Path(record.__file__).parent / "data" / "frame_golden.bin"
        assert encoded == golden_path.read_bytes()

    def test_roundtrip_1000_random_frames(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            frame = random_frame(rng)
            decoded = record.decode_frame(record.encode_frame(frame))
            assert decoded.gps_seconds == frame.gps_seconds
            assert decoded.gps_fraction_q64 == frame.gps_fraction_q64
            assert decoded.rx_channel == frame.rx_channel
            assert decoded.slot_index == frame.slot_index
            assert decoded.beam_index == frame.beam_index
            assert decoded.calibration_dbm_fs == frame.calibration_dbm_fs
            np.testing.assert_array_equal(decoded.iq, frame.iq)

    def test_corrupt_magic_rejected(self):
        block = bytearray(record.encode_frame(_golden_frame()))
        block[0] ^= 0xFF
        with pytest.raises(record.FrameDecodeError, match="magic"):
            record.decode_frame(bytes(block))

    def test_truncated_rejected(self):
        block = record.encode_frame(_golden_frame())
        with pytest.raises(record.FrameDecodeError):
            record.decode_frame(block[:-4])

    def test_field_overflow(self):
        frame = random_frame(np.random.default_rng(0))
        frame.beam_index = 70000
        with pytest.raises(ValueError, match="field overflow"):
            record.encode_frame(frame)

    def test_quantization_roundtrip_accuracy(self):
        rng = np.random.default_rng(5)
        samples = (rng.normal(size=256) + 1j * rng.normal(size=256)) * 0.05
        frame, clipped = record.CaptureFrame.from_complex(
            samples, 0.0, gps_seconds=0, gps_fraction_q64=0, rx_channel=0,
            slot_index=0, beam_index=0)
        assert clipped == 0
        recovered = frame.complex_baseband()
        assert np.max(np.abs(recovered - samples)) <= 1.0 / 32767

    def test_clipping_reported(self):
        samples = np.array([3.0 + 0.0j])
        _, clipped = record.CaptureFrame.from_complex(
            samples, 0.0, gps_seconds=0, gps_fraction_q64=0, rx_channel=0,
            slot_index=0, beam_index=0)
        assert clipped == 1


class TestTimestamps:
    def test_q64_ns_roundtrip(self):
        rng = np.random.default_rng(7)
        for ns in [0, 1, 999_999_999] + [int(v) for v in rng.integers(0, 10**9, 200)]:
            assert record.q64_to_ns(record.ns_to_q64(ns)) == ns

    def test_fraction_below_one(self):
        q = record.ns_to_q64(999_999_999)
        assert q < 1 << 64
        with pytest.raises(ValueError):
            record.ns_to_q64(10**9)


class TestPacketize:
    def test_fragment_count(self):
        block = bytes(8232)
        packets = record.packetize(block, 8192, session_id=1, frame_id=0)
        assert len(packets) == 2
        assert len(packets[0]) == 8192 + 16

    def test_reorder_invariance(self):
        block = bytes(random.Random(3).randbytes(8232))
        packets = record.packetize(block, 1024, session_id=1, frame_id=5)
        shuffled = packets[:]
        random.Random(9).shuffle(shuffled)
        result = record.reassemble(shuffled)
        assert result.frames[5] == block
        assert result.lost_frames == []

    def test_missing_fragment_flags_frame_lost(self):
        block_a = bytes(random.Random(1).randbytes(4000))
        block_b = bytes(random.Random(2).randbytes(4000))
        packets = record.packetize(block_a, 512, 1, 0) + record.packetize(block_b, 512, 1, 1)
        packets.pop(2)  # drop one fragment of frame 0
        result = record.reassemble(packets)
        assert result.lost_frames == [0]
        assert result.frames[1] == block_b

    def test_minimum_payload(self):
        with pytest.raises(ValueError):
            record.packetize(b"x" * 100, 32, 0, 0)


class TestSession:
    def test_write_read_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        manifest = record.SessionManifest(sample_count=64)
        with record.SessionWriter(tmp_path / "s", manifest) as writer:
            frames = [random_frame(rng) for _ in range(10)]
            for frame in frames:
                writer.add_frame(frame)
        session = record.read_session(tmp_path / "s")
        assert session.manifest.frame_count == 10
        assert session.manifest.byte_count == 10 * record.frame_byte_size(64)
        assert session.corrupt_count == 0
        np.testing.assert_array_equal(session.frames[3].iq, frames[3].iq)

    def test_corrupt_frame_skipped_and_counted(self, tmp_path):
        rng = np.random.default_rng(2)
        manifest = record.SessionManifest(sample_count=64)
        with record.SessionWriter(tmp_path / "s", manifest) as writer:
            for _ in range(5):
                writer.add_frame(random_frame(rng))
        data_path = tmp_path / "s" / record.DATA_NAME
        raw = bytearray(data_path.read_bytes())
        raw[record.frame_byte_size(64) * 2] ^= 0xFF  # kill frame 2's magic
        data_path.write_bytes(bytes(raw))
        session = record.read_session(tmp_path / "s")
        assert session.corrupt_count == 1
        assert len(session.frames) == 4

    def test_manifest_accounting_enforced(self):
        manifest = record.SessionManifest(sample_count=64, frame_count=3, byte_count=5)
        with pytest.raises(ValueError, match="byte accounting"):
            manifest.validate()


class TestThroughput:
    def full_dwell_manifest(self, hours=1.0):
        sweeps = int(20 * 3600 * hours)
        frames = sweeps * 29 * 4
        return record.SessionManifest(
            capture_mode="full-dwell", sample_count=40_000, dwell_ns=40_000,
            n_sweeps=sweeps, frame_count=frames,
            byte_count=frames * record.frame_byte_size(40_000))

    def test_full_dwell_instantaneous_128_gbps(self):
        report = record.throughput_report(self.full_dwell_manifest(), 3600.0)
        # 4 channels x 1 Gsps x 4 B: at the recorder burst ceiling scale.
        assert report.instantaneous_gbps == pytest.approx(128.0, abs=1e-9)

    def test_full_dwell_projects_1_5_tb_per_hour(self):
        report = record.throughput_report(self.full_dwell_manifest(), 3600.0)
        assert report.tb_per_hour == pytest.approx(1.5, rel=0.10)

    def test_cir_mode_sustained_rate(self):
        frames = 20 * 116
        manifest = record.SessionManifest(
            sample_count=2048, frame_count=frames,
            byte_count=frames * record.frame_byte_size(2048))
        report = record.throughput_report(manifest, 1.0, aux_bytes_per_s=0.0)
        assert report.sustained_gbps == pytest.approx(0.1527, rel=1e-3)

    def test_zero_frames(self):
        report = record.throughput_report(record.SessionManifest(), 10.0)
        assert report.instantaneous_gbps == 0.0
        assert report.sustained_gbps == 0.0
        assert report.tb_per_hour == 0.0

    def test_rejects_zero_wall_time(self):
        with pytest.raises(ValueError):
            record.throughput_report(record.SessionManifest(), 0.0)
