"""Simulated 28 GHz vehicle-to-vehicle directional channel sounder.

The package mirrors the measurement chain of a real-time beam-sweeping
sounder: Zadoff-Chu waveforms, a geometric multipath channel, a
four-array beam sweep, a bit-exact capture container, and the
correlation processing that turns captures into per-beam channel
impulse responses and drive statistics.
"""

__version__ = "0.1.0"

from .waveform import ZcSequence, generate_zc, cyclic_shift, periodic_xcorr, validate_cazac
from .arrays import ArraySpec, Beam, BeamCodebook, ArrayPlacement, beam_gain
from .scenario import Scene, load_scenario, sample_track, drive_stats, preset_text
from .channel import Path, PathSet, free_space_path_loss, trace_paths, synthesize_cir
from .sweep import SweepSchedule, build_schedule, execute_sweep
from .record import CaptureFrame, encode_frame, decode_frame, packetize, reassemble
from .rxproc import CirEstimate, estimate_cir, rss_per_beam, normalize_and_stack, delay_spread

__all__ = [
    "__version__",
    "ZcSequence", "generate_zc", "cyclic_shift", "periodic_xcorr", "validate_cazac",
    "ArraySpec", "Beam", "BeamCodebook", "ArrayPlacement", "beam_gain",
    "Scene", "load_scenario", "sample_track", "drive_stats", "preset_text",
    "Path", "PathSet", "free_space_path_loss", "trace_paths", "synthesize_cir",
    "SweepSchedule", "build_schedule", "execute_sweep",
    "CaptureFrame", "encode_frame", "decode_frame", "packetize", "reassemble",
    "CirEstimate", "estimate_cir", "rss_per_beam", "normalize_and_stack", "delay_spread",
]
