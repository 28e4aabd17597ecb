"""Capture container format, UDP-style packetization, and rate accounting.

Frames use a fixed little-endian layout so goldens stay bit-exact and
streaming writes are trivial:

    magic "RCH2"      4 B
    version           u16
    rx_channel        u8
    slot_index        u8
    beam_index        u16
    flags (reserved)  u16
    sample_count      u32
    gps_seconds       u64
    gps_fraction      u64   Q0.64 fraction of a second
    calibration       f64   dBm at full scale
    samples           sample_count x (i16 I, i16 Q)

Header total 40 bytes; a 2048-sample frame encodes to 8232 bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "FrameDecodeError",
    "CaptureFrame",
    "encode_frame",
    "decode_frame",
    "frame_byte_size",
    "packetize",
    "reassemble",
    "ReassemblyResult",
    "ns_to_q64",
    "q64_to_ns",
    "SessionManifest",
    "SessionWriter",
    "read_session",
    "SessionFrames",
    "throughput_report",
    "ThroughputReport",
    "FORMAT_VERSION",
    "FRAME_MAGIC",
    "DEFAULT_AUX_BYTES_PER_S",
]

FRAME_MAGIC = b"RCH2"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHBBHHIQQd")
HEADER_BYTES = _HEADER.size  # 40

_PACKET_HEADER = struct.Struct("<IIHHI")  # session, frame, frag idx, frag count, payload len
PACKET_HEADER_BYTES = _PACKET_HEADER.size  # 16

_NS_PER_S = 1_000_000_000
_Q64 = 1 << 64

# Sustained-rate projections add the synchronized auxiliary sensor
# streams recorded alongside the captures (360-degree video dominates;
# GPS is negligible). 44 MB/s matches an 8K stitched stream.
DEFAULT_AUX_BYTES_PER_S = 44e6

INT16_FULL_SCALE = 32767


class FrameDecodeError(ValueError):
    """Raised when a byte block is not a valid capture frame."""


def ns_to_q64(fraction_ns: int) -> int:
    """Fraction of a second in nanoseconds -> Q0.64 fixed point (round nearest)."""
    if not 0 <= fraction_ns < _NS_PER_S:
        raise ValueError(f"fraction must be in [0, 1e9) ns, got {fraction_ns}")
    return (fraction_ns * _Q64 + _NS_PER_S // 2) // _NS_PER_S


def q64_to_ns(q64: int) -> int:
    """Q0.64 fraction -> nanoseconds (round nearest; exact round trip)."""
    if not 0 <= q64 < _Q64:
        raise ValueError("Q0.64 value out of range")
    return (q64 * _NS_PER_S + (_Q64 >> 1)) >> 64


@dataclass
class CaptureFrame:
    """One beam-dwell of complex samples from one receive channel."""

    gps_seconds: int
    gps_fraction_q64: int  # Q0.64 fraction of a second
    rx_channel: int  # 0..3
    slot_index: int  # 0..28
    beam_index: int
    calibration_dbm_fs: float
    iq: np.ndarray  # interleaved int16 I/Q, length 2 * sample_count

    def __post_init__(self):
        self.iq = np.ascontiguousarray(self.iq, dtype=np.int16)
        if self.iq.ndim != 1 or len(self.iq) % 2:
            raise ValueError("iq must be a flat interleaved I/Q vector")
        if not 0 <= self.gps_fraction_q64 < _Q64:
            raise ValueError("gps_fraction must be a Q0.64 value below 1.0")

    @property
    def sample_count(self) -> int:
        return len(self.iq) // 2

    @property
    def timestamp_s(self) -> float:
        return self.gps_seconds + self.gps_fraction_q64 / _Q64

    @property
    def gps_fraction_ns(self) -> int:
        return q64_to_ns(self.gps_fraction_q64)

    def complex_baseband(self) -> np.ndarray:
        """Samples as complex sqrt-milliwatt values per the calibration."""
        scale = 10.0 ** (self.calibration_dbm_fs / 20.0) / INT16_FULL_SCALE
        data = self.iq.astype(np.float64) * scale
        return data[0::2] + 1j * data[1::2]

    @staticmethod
    def from_complex(samples: np.ndarray, calibration_dbm_fs: float, **kwargs):
        """Quantize complex sqrt-milliwatt samples to an int16 frame.

        Returns (frame, clipped_sample_count).
        """
        scale = INT16_FULL_SCALE / 10.0 ** (calibration_dbm_fs / 20.0)
        iq = np.empty(2 * len(samples), dtype=np.float64)
        iq[0::2] = np.real(samples) * scale
        iq[1::2] = np.imag(samples) * scale
        clipped = int(np.count_nonzero(np.abs(iq) > INT16_FULL_SCALE))
        quantized = np.clip(np.rint(iq), -INT16_FULL_SCALE, INT16_FULL_SCALE).astype(np.int16)
        frame = CaptureFrame(calibration_dbm_fs=calibration_dbm_fs, iq=quantized, **kwargs)
        return frame, clipped


def frame_byte_size(sample_count: int) -> int:
    return HEADER_BYTES + 4 * sample_count


def encode_frame(frame: CaptureFrame) -> bytes:
    """Serialize a frame to its fixed little-endian byte layout."""
    if not 0 <= frame.rx_channel <= 0xFF:
        raise ValueError("field overflow: rx_channel")
    if not 0 <= frame.slot_index <= 0xFF:
        raise ValueError("field overflow: slot_index")
    if not 0 <= frame.beam_index <= 0xFFFF:
        raise ValueError("field overflow: beam_index")
    if not 0 <= frame.gps_seconds < (1 << 64):
        raise ValueError("field overflow: gps_seconds")
    header = _HEADER.pack(FRAME_MAGIC, FORMAT_VERSION, frame.rx_channel,
                          frame.slot_index, frame.beam_index, 0,
                          frame.sample_count, frame.gps_seconds,
                          frame.gps_fraction_q64, frame.calibration_dbm_fs)
    return header + frame.iq.astype("<i2").tobytes()


def decode_frame(block: bytes) -> CaptureFrame:
    """Parse one encoded frame; raises FrameDecodeError on bad bytes."""
    if len(block) < HEADER_BYTES:
        raise FrameDecodeError(f"block too short for header: {len(block)} bytes")
    magic, version, rx_channel, slot, beam, _flags, count, seconds, fraction, cal = \
        _HEADER.unpack_from(block)
    if magic != FRAME_MAGIC:
        raise FrameDecodeError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FrameDecodeError(f"unsupported format version {version}")
    expected = frame_byte_size(count)
    if len(block) != expected:
        raise FrameDecodeError(f"frame size mismatch: expected {expected}, got {len(block)}")
    iq = np.frombuffer(block, dtype="<i2", offset=HEADER_BYTES).astype(np.int16)
    return CaptureFrame(gps_seconds=seconds, gps_fraction_q64=fraction,
                        rx_channel=rx_channel, slot_index=slot, beam_index=beam,
                        calibration_dbm_fs=cal, iq=iq)


# ---------------------------------------------------------------------------
# Packetization emulation


def packetize(block: bytes, payload_size: int, session_id: int, frame_id: int) -> list[bytes]:
    """Split a frame block into sequenced packets with 16-byte headers."""
    if payload_size < 64:
        raise ValueError(f"payload_size must be >= 64, got {payload_size}")
    count = max(1, -(-len(block) // payload_size))
    if count > 0xFFFF:
        raise ValueError("field overflow: fragment count")
    packets = []
    for i in range(count):
        payload = block[i * payload_size:(i + 1) * payload_size]
        header = _PACKET_HEADER.pack(session_id, frame_id, i, count, len(payload))
        packets.append(header + payload)
    return packets


@dataclass
class ReassemblyResult:
    frames: dict  # frame_id -> bytes
    lost_frames: list  # frame ids with missing fragments
    session_id: int | None = None


def reassemble(packets) -> ReassemblyResult:
    """Rebuild frame blocks from packets in any order.

    Frames with one or more missing fragments are flagged lost rather
    than returned partially.
    """
    staged: dict[int, dict] = {}
    session_id = None
    for packet in packets:
        if len(packet) < PACKET_HEADER_BYTES:
            continue
        sid, fid, idx, count, length = _PACKET_HEADER.unpack_from(packet)
        session_id = sid if session_id is None else session_id
        payload = packet[PACKET_HEADER_BYTES:PACKET_HEADER_BYTES + length]
        entry = staged.setdefault(fid, {"count": count, "parts": {}})
        entry["parts"][idx] = payload
    frames = {}
    lost = []
    for fid, entry in sorted(staged.items()):
        if len(entry["parts"]) == entry["count"]:
            frames[fid] = b"".join(entry["parts"][i] for i in range(entry["count"]))
        else:
            lost.append(fid)
    return ReassemblyResult(frames=frames, lost_frames=lost, session_id=session_id)


# ---------------------------------------------------------------------------
# Session files


@dataclass
class SessionManifest:
    """Sidecar metadata for one capture session."""

    format_version: int = FORMAT_VERSION
    scenario_name: str = ""
    scenario_hash: str = ""
    seed: int = 0
    n_sweeps: int = 0
    n_slots: int = 29
    n_channels: int = 4
    captures_per_dwell: int = 1
    dwell_ns: int = 40_000
    guard_ns: int = 1_000
    sweep_period_ns: int = 50_000_000
    epoch_gps_seconds: int = 0
    epoch_gps_fraction_ns: int = 0
    capture_mode: str = "cir"
    sample_count: int = 2048
    calibration_dbm_fs: float = 0.0
    bandwidth_hz: float = 1.0e9
    carrier_hz: float = 28.0e9
    zc_root: int = 1
    zc_length: int = 2048
    tx_shifts: tuple = (0, 1024)
    rx_array_names: tuple = ("front-left", "front-right", "rear-left", "rear-right")
    rx_boresights_deg: tuple = (45.0, -45.0, 135.0, -135.0)
    # Codebook pointing per beam index, so sessions stay processable
    # without the scenario that produced them.
    beam_azimuths_deg: tuple = ()
    beam_elevations_deg: tuple = ()
    rx_beamwidth_deg: float = 13.0
    frame_count: int = 0
    byte_count: int = 0

    @property
    def frame_size(self) -> int:
        return frame_byte_size(self.sample_count)

    def validate(self):
        if self.frame_count * self.frame_size != self.byte_count:
            raise ValueError("manifest byte accounting does not match the data section")

    def to_json(self) -> str:
        payload = {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in self.__dict__.items()}
        return json.dumps(payload, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SessionManifest":
        payload = json.loads(text)
        for key in ("tx_shifts", "rx_array_names", "rx_boresights_deg",
                    "beam_azimuths_deg", "beam_elevations_deg"):
            if key in payload:
                payload[key] = tuple(payload[key])
        return SessionManifest(**payload)


MANIFEST_NAME = "manifest.json"
DATA_NAME = "frames.rch2"


class SessionWriter:
    """Single-writer session: append frames, then close to seal the manifest."""

    def __init__(self, directory, manifest: SessionManifest):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest
        self._fh = open(self.directory / DATA_NAME, "wb")
        self._frames = 0
        self._bytes = 0

    def add_frame(self, frame: CaptureFrame):
        block = encode_frame(frame)
        self._fh.write(block)
        self._frames += 1
        self._bytes += len(block)

    def close(self) -> SessionManifest:
        self._fh.close()
        self.manifest.frame_count = self._frames
        self.manifest.byte_count = self._bytes
        self.manifest.validate()
        (self.directory / MANIFEST_NAME).write_text(self.manifest.to_json() + "\n")
        return self.manifest

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if not self._fh.closed:
            if exc_type is None:
                self.close()
            else:
                self._fh.close()


@dataclass
class SessionFrames:
    manifest: SessionManifest
    frames: list
    corrupt_count: int


def read_session(directory) -> SessionFrames:
    """Load a session, skipping (and counting) corrupt frames."""
    directory = Path(directory)
    manifest = SessionManifest.from_json((directory / MANIFEST_NAME).read_text())
    data = (directory / DATA_NAME).read_bytes()
    size = manifest.frame_size
    frames = []
    corrupt = 0
    for offset in range(0, len(data) - size + 1, size):
        try:
            frames.append(decode_frame(data[offset:offset + size]))
        except FrameDecodeError:
            corrupt += 1
    return SessionFrames(manifest=manifest, frames=frames, corrupt_count=corrupt)


# ---------------------------------------------------------------------------
# Throughput accounting


@dataclass(frozen=True)
class ThroughputReport:
    instantaneous_gbps: float  # in-sweep sample rate over one dwell
    sustained_gbps: float      # frame bytes over wall time
    tb_per_hour: float         # sustained projection including aux sensors
    frame_bytes: int
    aux_bytes_per_s: float


def throughput_report(manifest: SessionManifest, wall_time_s: float,
                      aux_bytes_per_s: float = DEFAULT_AUX_BYTES_PER_S) -> ThroughputReport:
    """Rates implied by a session: burst, sustained, and TB/hr projection."""
    if wall_time_s <= 0:
        raise ValueError("wall time must be positive")
    if manifest.frame_count == 0:
        return ThroughputReport(0.0, 0.0, 0.0, manifest.frame_size, aux_bytes_per_s)
    # Burst rate while a dwell is being captured: IQ payload across all
    # channels divided by the dwell (header overhead excluded).
    sample_bytes = 4 * manifest.sample_count * manifest.captures_per_dwell
    instantaneous = sample_bytes * manifest.n_channels * 8.0 / (manifest.dwell_ns * 1e-9) / 1e9
    sustained = manifest.byte_count * 8.0 / wall_time_s / 1e9
    bytes_per_hour = (manifest.byte_count / wall_time_s + aux_bytes_per_s) * 3600.0
    return ThroughputReport(instantaneous_gbps=instantaneous,
                            sustained_gbps=sustained,
                            tb_per_hour=bytes_per_hour / 1e12,
                            frame_bytes=manifest.frame_size,
                            aux_bytes_per_s=aux_bytes_per_s)
