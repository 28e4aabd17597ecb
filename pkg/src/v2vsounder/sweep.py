"""Beam-sweep scheduling and the end-to-end simulated capture.

All four receive arrays switch beams simultaneously: slot k of a sweep
points every array at codebook entry k for one dwell. Sweeps repeat on
the epoch-aligned grid epoch + m / repetition_rate. Within a dwell the
channel is frozen except for the per-path Doppler phase rotation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import arrays as ar
from . import channel as ch
from .record import CaptureFrame, ns_to_q64
from .scenario import Scene, sample_track
from .waveform import ZcSequence, cyclic_shift, generate_zc

__all__ = [
    "SweepSchedule",
    "build_schedule",
    "TxChain",
    "RxChain",
    "build_chains",
    "make_tx_waveforms",
    "execute_sweep",
    "frames_per_sweep",
]

log = logging.getLogger(__name__)

_NS_PER_S = 1_000_000_000


@dataclass(frozen=True)
class SweepSchedule:
    """Timing of one beam sweep against the PPS-derived epoch."""

    epoch_gps_seconds: int
    epoch_gps_fraction_ns: int
    dwell_ns: int
    guard_ns: int
    slots: tuple[tuple[int, tuple[int, ...]], ...]  # (slot, per-array beam index)
    repetition_rate_hz: float
    repetition_period_ns: int
    captures_per_dwell: int = 1

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    @property
    def span_ns(self) -> int:
        return self.n_slots * self.dwell_ns

    def sweep_start_ns(self, sweep_index: int) -> int:
        """Offset of a sweep start from the epoch, in integer ns."""
        return sweep_index * self.repetition_period_ns

    def slot_capture_offset_ns(self, sweep_index: int, slot: int, capture: int = 0,
                               capture_ns: int = 0) -> int:
        return (self.sweep_start_ns(sweep_index) + slot * self.dwell_ns
                + self.guard_ns + capture * capture_ns)


def build_schedule(codebooks, dwell_ns: int, epoch: tuple[int, int] = (0, 0),
                   repetition_rate_hz: float = 20.0, guard_ns: int = 1000,
                   cir_window_ns: int = 2048, captures_per_dwell: int = 1) -> SweepSchedule:
    """Slot the codebooks onto the dwell grid.

    ``codebooks`` is one BeamCodebook per receive array; all must have
    equal length. Slot k assigns beam k of every array. The dwell must
    fit the settling guard plus at least one CIR capture.
    """
    lengths = {len(cb) for cb in codebooks}
    if len(lengths) != 1:
        raise ValueError(f"codebooks must have equal length, got {sorted(lengths)}")
    n_slots = lengths.pop()
    needed = guard_ns + captures_per_dwell * cir_window_ns
    if dwell_ns <= needed:
        raise ValueError(f"dwell {dwell_ns} ns too short: needs > {needed} ns "
                         f"(guard {guard_ns} + {captures_per_dwell} x {cir_window_ns})")
    if repetition_rate_hz <= 0:
        raise ValueError("repetition rate must be positive")
    period_ns = int(round(_NS_PER_S / repetition_rate_hz))
    if period_ns < n_slots * dwell_ns:
        raise ValueError("repetition period shorter than the sweep span")
    slots = tuple((k, tuple(k for _ in codebooks)) for k in range(n_slots))
    return SweepSchedule(epoch_gps_seconds=int(epoch[0]),
                         epoch_gps_fraction_ns=int(epoch[1]),
                         dwell_ns=int(dwell_ns), guard_ns=int(guard_ns), slots=slots,
                         repetition_rate_hz=repetition_rate_hz,
                         repetition_period_ns=period_ns,
                         captures_per_dwell=captures_per_dwell)


@dataclass(frozen=True)
class TxChain:
    chain_id: str
    placement: ar.ArrayPlacement
    beam: ar.Beam
    spec: ar.ArraySpec
    shift: int


@dataclass(frozen=True)
class RxChain:
    channel: int
    placement: ar.ArrayPlacement
    spec: ar.ArraySpec
    codebook: ar.BeamCodebook


def build_chains(scene: Scene) -> tuple[list[TxChain], list[RxChain]]:
    """Resolve the scene's sounder config into transmit/receive chains."""
    sounder = scene.sounder
    tx_vehicle = scene.tx_vehicle
    tx_spec = ar.ArraySpec(element_count=256, composite_boresight_gain_db=59.1,
                           sidelobe_floor_db=sounder.sidelobe_floor_db)
    tx_pairs = ar.build_tx_beams(tx_vehicle.length_m, tx_vehicle.width_m,
                                 beamwidth_deg=sounder.tx_beamwidth_deg)
    tx_chains = [TxChain(chain_id=f"tx{i + 1}", placement=placement, beam=beam,
                         spec=tx_spec, shift=sounder.tx_shifts[i])
                 for i, (beam, placement) in enumerate(tx_pairs[:len(sounder.tx_shifts)])]

    rx_vehicle = scene.rx_vehicle
    rx_spec = ar.ArraySpec(element_count=64, composite_boresight_gain_db=47.0,
                           sidelobe_floor_db=sounder.sidelobe_floor_db)
    codebook = ar.build_rx_codebook(rx_spec, beamwidth_deg=sounder.rx_beamwidth_deg,
                                    rows=sounder.rx_codebook_rows)
    rx_chains = [RxChain(channel=i, placement=p, spec=rx_spec, codebook=codebook)
                 for i, p in enumerate(ar.mount_arrays(rx_vehicle))]
    return tx_chains, rx_chains


def make_tx_waveforms(sounder) -> list[ZcSequence]:
    """Per-chain sounding waveforms: one base sequence, cyclically shifted."""
    base = generate_zc(sounder.zc_root, sounder.zc_length,
                       symbol_period_ns=sounder.symbol_period_ns)
    return [cyclic_shift(base, s) if s else base for s in sounder.tx_shifts]


def frames_per_sweep(schedule: SweepSchedule, n_channels: int = 4) -> int:
    return schedule.n_slots * n_channels * schedule.captures_per_dwell


def _gps_stamp(schedule: SweepSchedule, offset_ns: int) -> tuple[int, int]:
    total = schedule.epoch_gps_fraction_ns + offset_ns
    return schedule.epoch_gps_seconds + total // _NS_PER_S, total % _NS_PER_S


def _beam_gains_along_paths(paths, pose: ch.ArrayPose, beam: ar.Beam,
                            spec: ar.ArraySpec, departure: bool):
    gains = []
    for p in paths:
        az = p.aod_az_deg if departure else p.aoa_az_deg
        el = p.aod_el_deg if departure else p.aoa_el_deg
        gains.append(ar.beam_gain(spec, beam, pose.local_azimuth(az), el))
    return gains


def _synthesize_channel_samples(scene, tx_chains, rx_chain, beam,
                                waveform_ffts, t_s, n_samples, sample_period_s):
    """Noise-free receive samples for one dwell capture, sqrt-mW units."""
    sounder = scene.sounder
    n_seq = scene.sounder.zc_length
    rx_vehicle = scene.rx_vehicle
    rx_pose = ch.pose_array(rx_chain.placement, sample_track(rx_vehicle.track, t_s),
                            rx_vehicle.vehicle_id)
    total = np.zeros(n_samples, dtype=np.complex128)
    reps = -(-n_samples // n_seq)
    sample_idx = np.arange(n_samples)
    for tx_chain, w_fft in zip(tx_chains, waveform_ffts):
        tx_vehicle = scene.tx_vehicle
        tx_pose = ch.pose_array(tx_chain.placement, sample_track(tx_vehicle.track, t_s),
                                tx_vehicle.vehicle_id)
        pathset = ch.trace_paths(scene, tx_pose, rx_pose, t_s)
        # Transmit side radiates at EIRP on boresight; both sides roll
        # off with the pattern model.
        tx_gains = [sounder.eirp_dbm + ar.relative_pattern_gain(
                        ar.angle_between_deg(tx_pose.local_azimuth(p.aod_az_deg), p.aod_el_deg,
                                             tx_chain.beam.azimuth_deg,
                                             tx_chain.beam.elevation_deg),
                        tx_chain.beam.beamwidth_3db_deg,
                        sidelobe_floor_db=tx_chain.spec.sidelobe_floor_db,
                        pattern_model=tx_chain.spec.pattern_model,
                        element_count=tx_chain.spec.element_count)
                    for p in pathset.paths]
        rx_gains = _beam_gains_along_paths(pathset.paths, rx_pose, beam,
                                           rx_chain.spec, departure=False)
        spectra, kept, _ = ch.pathset_frequency_response(
            pathset, tx_gains, rx_gains, sounder.bandwidth_hz, n_seq,
            scene.channel.carrier_hz)
        for spectrum, path in zip(spectra, kept):
            base = np.fft.ifft(w_fft * spectrum)
            tiled = np.tile(base, reps)[:n_samples]
            if abs(path.doppler_hz) > 0:
                rotation = np.exp(2j * np.pi * path.doppler_hz * sample_idx * sample_period_s)
                total += tiled * rotation
            else:
                total += tiled
    return total


def execute_sweep(schedule: SweepSchedule, scene: Scene, waveforms, seed: int,
                  sweep_index: int = 0) -> list[CaptureFrame]:
    """Simulate one full sweep: every slot, capture, and receive channel.

    Output frames are ordered by (slot, capture, channel) and carry
    GPS-aligned timestamps. (schedule, scene, seed, sweep_index) fully
    determine the result; noise draws use per-frame counter seeds so the
    ordering of evaluation cannot perturb them.
    """
    sounder = scene.sounder
    tx_chains, rx_chains = build_chains(scene)
    if len(waveforms) != len(tx_chains):
        raise ValueError(f"need {len(tx_chains)} waveforms, got {len(waveforms)}")
    for w, chainspec in zip(waveforms, tx_chains):
        if w.shift != chainspec.shift:
            raise ValueError(f"waveform shift {w.shift} does not match chain "
                             f"{chainspec.chain_id} plan {chainspec.shift}")

    n_seq = sounder.zc_length
    sample_period_s = sounder.symbol_period_ns * 1e-9
    capture_ns = int(round(n_seq * sounder.symbol_period_ns))
    if sounder.capture_mode == "cir":
        n_samples = n_seq
    else:
        n_samples = sounder.dwell_samples

    span = scene.time_span()
    sweep_t0 = (schedule.epoch_gps_seconds + schedule.epoch_gps_fraction_ns * 1e-9
                + schedule.sweep_start_ns(sweep_index) * 1e-9)
    sweep_t1 = sweep_t0 + schedule.span_ns * 1e-9
    if sweep_t0 < span[0] or sweep_t1 > span[1]:
        raise ValueError(f"scene time-coverage gap: sweep [{sweep_t0:.6f}, {sweep_t1:.6f}] s "
                         f"outside scene span [{span[0]:.6f}, {span[1]:.6f}] s")

    noise_dbm = ch.noise_power_dbm(sounder.bandwidth_hz, scene.channel.noise_figure_db)
    noise_sigma = 10.0 ** (noise_dbm / 20.0) if scene.channel.noise_enabled else 0.0

    waveform_ffts = [np.fft.fft(w.samples) for w in waveforms]
    frames = []
    clipped_total = 0
    for slot, beam_indices in schedule.slots:
        for capture in range(schedule.captures_per_dwell):
            if sounder.capture_mode == "cir":
                offset_ns = schedule.slot_capture_offset_ns(sweep_index, slot, capture,
                                                            capture_ns)
            else:
                # Full-dwell capture spans the whole slot, guard included.
                offset_ns = schedule.sweep_start_ns(sweep_index) + slot * schedule.dwell_ns
            seconds, fraction_ns = _gps_stamp(schedule, offset_ns)
            t_s = seconds + fraction_ns * 1e-9
            for rx_chain in rx_chains:
                beam = rx_chain.codebook[beam_indices[rx_chain.channel]]
                samples = _synthesize_channel_samples(
                    scene, tx_chains, rx_chain, beam, waveform_ffts,
                    t_s, n_samples, sample_period_s)
                if noise_sigma > 0:
                    rng = np.random.Generator(np.random.Philox(
                        np.random.SeedSequence([seed, sweep_index, slot, capture,
                                                rx_chain.channel])))
                    noise = rng.standard_normal(2 * n_samples)
                    samples = samples + (noise[0::2] + 1j * noise[1::2]) * (noise_sigma / math.sqrt(2))
                frame, clipped = CaptureFrame.from_complex(
                    samples, sounder.calibration_dbm_fs,
                    gps_seconds=seconds, gps_fraction_q64=ns_to_q64(fraction_ns),
                    rx_channel=rx_chain.channel, slot_index=slot,
                    beam_index=beam.index)
                clipped_total += clipped
                frames.append(frame)
    if clipped_total:
        log.warning("sweep %d clipped %d samples at full scale; raise "
                    "calibration_dbm_fs", sweep_index, clipped_total)
    return frames
