"""Capture processing: per-chain CIR estimates, beam RSS, stacked CIRs.

The correlation receiver recovers one tapped delay line per transmit
chain from every capture. Cyclic shifts give each chain a disjoint
delay window: a chain advanced by s occupies lags [(N - s) mod N,
(N - s) mod N + N/n_chains), so the default {0, 1024} plan splits the
2048-lag profile into [0, 1024) and [1024, 2048).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .record import CaptureFrame
from .waveform import ZcSequence, periodic_xcorr

__all__ = [
    "CirEstimate",
    "RssEntry",
    "BeamRssTable",
    "StackedCir",
    "estimate_cir",
    "extract_capture_window",
    "rss_per_beam",
    "normalize_and_stack",
    "delay_spread",
    "estimate_doppler",
    "first_arrival_delay_ns",
    "write_rss_csv",
    "write_stacked_csv",
    "write_delay_spread_csv",
    "DETECTION_THRESHOLD_DB",
    "NOISE_QUARTILE_CALIBRATION_DB",
]

log = logging.getLogger(__name__)

DETECTION_THRESHOLD_DB = 12.0

# The floor statistic is the median tap power of the lowest-power
# quartile. For complex Gaussian noise that order statistic sits at the
# 12.5% point of an exponential distribution, a factor -ln(0.875) below
# the mean; this constant rescales it to an unbiased mean-noise-power
# estimate.
NOISE_QUARTILE_CALIBRATION_DB = float(-10.0 * math.log10(-math.log(0.875)))

_FLOOR_DBM = -400.0  # stand-in for log of an empty/zero power


def _power_dbm(power_mw: float) -> float:
    return 10.0 * math.log10(power_mw) if power_mw > 0 else _FLOOR_DBM


@dataclass(frozen=True)
class CirEstimate:
    """Tapped delay line for one (tx chain, rx array, beam) capture."""

    tx_id: str
    rx_array_id: str
    rx_channel: int
    beam_index: int
    slot_index: int
    timestamp_s: float
    symbol_period_ns: float
    taps: np.ndarray  # complex, sqrt-mW units, tap spacing = symbol period
    noise_floor_dbm: float
    detection_threshold_db: float = DETECTION_THRESHOLD_DB

    def __post_init__(self):
        np.asarray(self.taps).setflags(write=False)

    @property
    def tap_powers_dbm(self) -> np.ndarray:
        powers = np.abs(self.taps) ** 2
        with np.errstate(divide="ignore"):
            return np.where(powers > 0, 10.0 * np.log10(powers, where=powers > 0),
                            _FLOOR_DBM)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(np.abs(self.taps)))

    @property
    def peak_power_dbm(self) -> float:
        return _power_dbm(float(np.max(np.abs(self.taps)) ** 2))

    @property
    def peak_delay_ns(self) -> float:
        return self.peak_index * self.symbol_period_ns

    @property
    def detection_level_dbm(self) -> float:
        return self.noise_floor_dbm + self.detection_threshold_db

    def detected_mask(self) -> np.ndarray:
        return np.abs(self.taps) ** 2 > 10.0 ** (self.detection_level_dbm / 10.0)


def _noise_floor_dbm(tap_powers_mw: np.ndarray) -> float:
    """Median power of the lowest quartile, calibrated to the mean level."""
    quartile = np.sort(tap_powers_mw)[: max(1, len(tap_powers_mw) // 4)]
    statistic = float(np.median(quartile))
    return _power_dbm(statistic) + NOISE_QUARTILE_CALIBRATION_DB


def estimate_cir(frame: CaptureFrame, reference: ZcSequence, shift_plan,
                 detection_threshold_db: float = DETECTION_THRESHOLD_DB) -> list[CirEstimate]:
    """Correlate one capture into per-transmit-chain CIR estimates.

    The profile is normalized by the sequence length so tap values
    estimate the complex path amplitudes directly (sqrt-mW, hence dBm
    tap powers via the capture's calibration constant).
    """
    samples = frame.complex_baseband()
    n = reference.length
    if len(samples) != n:
        raise ValueError(f"length mismatch: frame has {len(samples)} samples, "
                         f"reference {n}")
    if not math.isfinite(frame.calibration_dbm_fs):
        raise ValueError("unknown calibration: frame carries no dBm full-scale constant")
    shift_plan = list(shift_plan)
    profile = np.conj(periodic_xcorr(reference.samples, samples)) / n
    window = n // len(shift_plan)
    estimates = []
    for i, shift in enumerate(shift_plan):
        start = (n - shift) % n
        taps = profile[(start + np.arange(window)) % n]
        powers = np.abs(taps) ** 2
        estimates.append(CirEstimate(
            tx_id=f"tx{i + 1}", rx_array_id="", rx_channel=frame.rx_channel,
            beam_index=frame.beam_index, slot_index=frame.slot_index,
            timestamp_s=frame.timestamp_s,
            symbol_period_ns=reference.symbol_period_ns, taps=taps,
            noise_floor_dbm=_noise_floor_dbm(powers),
            detection_threshold_db=detection_threshold_db))
    return estimates


def extract_capture_window(frame: CaptureFrame, sequence_length: int) -> CaptureFrame:
    """Carve one correlation window out of a full-dwell capture.

    The second sequence period is used: it starts one full period into
    the dwell (past the settling guard) so the extraction offset is a
    multiple of the sequence length and lag indexing is unchanged.
    """
    if frame.sample_count < 2 * sequence_length:
        raise ValueError("full-dwell frame too short for window extraction")
    start = 2 * sequence_length  # interleaved I/Q -> element offset of sample N
    iq = frame.iq[start:start + 2 * sequence_length]
    return replace(frame, iq=iq.copy())


def _prominent_maxima(powers: np.ndarray, floor: float, min_ratio: float) -> list[int]:
    """Local maxima above ``floor`` with topographic prominence >= min_ratio.

    Prominence uses the standard key-saddle definition: the reference
    level of a peak is the higher of the two valley minima on the paths
    to the nearest strictly higher taps (or the global minimum at the
    edges). Band-limiting shoulders and tail-interference ripple carry
    almost no prominence and are rejected.
    """
    n = len(powers)
    candidates = [i for i in range(n)
                  if powers[i] > floor
                  and (i == 0 or powers[i] > powers[i - 1])
                  and (i == n - 1 or powers[i] >= powers[i + 1])]
    global_min = float(np.min(powers))
    accepted = []
    for i in candidates:
        saddles = []
        for walk in (range(i - 1, -1, -1), range(i + 1, n)):
            valley = powers[i]
            for j in walk:
                if powers[j] > powers[i]:
                    saddles.append(valley)
                    break
                valley = min(valley, powers[j])
        key = max(saddles) if saddles else global_min
        if key <= 0 or powers[i] >= key * min_ratio:
            accepted.append(i)
    return accepted


def first_arrival_delay_ns(estimate: CirEstimate, prominence_db: float = 6.0) -> float:
    """Delay of the earliest prominent tap above the detection level.

    A tap counts as an arrival when it is a local maximum standing at
    least ``prominence_db`` above its key saddle, which suppresses the
    shoulders and tail ripple of stronger neighboring paths.
    """
    powers = np.abs(estimate.taps) ** 2
    level = 10.0 ** (estimate.detection_level_dbm / 10.0)
    arrivals = _prominent_maxima(powers, level, 10.0 ** (prominence_db / 10.0))
    if not arrivals:
        raise ValueError("no taps above the detection level")
    return arrivals[0] * estimate.symbol_period_ns


# ---------------------------------------------------------------------------
# Beam RSS


@dataclass(frozen=True)
class RssEntry:
    tx_id: str
    rx_array_id: str
    rx_channel: int
    beam_index: int
    beam_azimuth_deg: float
    beam_elevation_deg: float
    rss_dbm: float
    detected_taps: int
    timestamp_s: float


@dataclass(frozen=True)
class BeamRssTable:
    entries: tuple[RssEntry, ...]

    def best(self, tx_id=None, rx_channel=None) -> RssEntry:
        candidates = [e for e in self.entries
                      if (tx_id is None or e.tx_id == tx_id)
                      and (rx_channel is None or e.rx_channel == rx_channel)]
        if not candidates:
            raise ValueError("no RSS entries match the selection")
        return max(candidates, key=lambda e: e.rss_dbm)


def rss_per_beam(estimates, codebook, elevation_filter_deg: float | None = None) -> BeamRssTable:
    """Integrated received power per (tx, rx array, beam).

    RSS sums the powers of taps above the detection level on top of the
    integrated noise floor of the window, so an all-noise capture reads
    the noise integration floor rather than minus infinity. The optional
    elevation filter keeps only the matching codebook row.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("empty input: no estimates to integrate")
    entries = []
    for est in estimates:
        beam = codebook[est.beam_index]
        if (elevation_filter_deg is not None
                and abs(beam.elevation_deg - elevation_filter_deg) > 1e-9):
            continue
        powers = np.abs(est.taps) ** 2
        mask = est.detected_mask()
        integrated_noise = 10.0 ** (est.noise_floor_dbm / 10.0) * len(est.taps)
        rss = _power_dbm(float(np.sum(powers[mask])) + integrated_noise)
        entries.append(RssEntry(tx_id=est.tx_id, rx_array_id=est.rx_array_id,
                                rx_channel=est.rx_channel, beam_index=est.beam_index,
                                beam_azimuth_deg=beam.azimuth_deg,
                                beam_elevation_deg=beam.elevation_deg,
                                rss_dbm=rss, detected_taps=int(np.count_nonzero(mask)),
                                timestamp_s=est.timestamp_s))
    return BeamRssTable(entries=tuple(entries))


# ---------------------------------------------------------------------------
# Normalized stacked CIRs


@dataclass(frozen=True)
class StackedCir:
    tx_id: str
    rx_array_id: str
    rx_channel: int
    beam_index: int
    delays_ns: np.ndarray
    power_db_rel: np.ndarray  # relative to the global peak tap


def normalize_and_stack(estimates) -> list[StackedCir]:
    """Normalize a selection of CIRs to their global peak tap.

    Every tap is referenced to the single largest tap magnitude across
    the whole selection; the peak tap therefore reads exactly 0 dB.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("empty selection")
    global_peak = max(float(np.max(np.abs(e.taps))) for e in estimates)
    if global_peak <= 0.0:
        raise ValueError("all-zero selection cannot be normalized")
    stacked = []
    for est in estimates:
        magnitudes = np.abs(est.taps) / global_peak
        with np.errstate(divide="ignore"):
            rel = np.where(magnitudes > 0, 20.0 * np.log10(magnitudes, where=magnitudes > 0),
                           _FLOOR_DBM)
        delays = np.arange(len(est.taps)) * est.symbol_period_ns
        stacked.append(StackedCir(tx_id=est.tx_id, rx_array_id=est.rx_array_id,
                                  rx_channel=est.rx_channel, beam_index=est.beam_index,
                                  delays_ns=delays, power_db_rel=rel))
    return stacked


# ---------------------------------------------------------------------------
# Delay statistics


def delay_spread(estimate: CirEstimate, threshold_db: float) -> float:
    """Power-weighted RMS spread of tap delays, in seconds.

    Taps within ``threshold_db`` of the peak contribute. The cut level
    must stay above the noise floor, otherwise the spread would be a
    noise statistic and the call is rejected.
    """
    powers = np.abs(estimate.taps) ** 2
    peak = float(np.max(powers))
    if peak <= 0:
        raise ValueError("no taps above threshold: empty estimate")
    cut_dbm = _power_dbm(peak) - threshold_db
    if cut_dbm < estimate.noise_floor_dbm:
        raise ValueError(f"threshold reaches below the noise floor "
                         f"({cut_dbm:.1f} dBm < {estimate.noise_floor_dbm:.1f} dBm)")
    mask = powers >= peak * 10.0 ** (-threshold_db / 10.0)
    if not np.any(mask):
        raise ValueError("no taps above threshold")
    delays_s = np.arange(len(powers)) * estimate.symbol_period_ns * 1e-9
    weights = powers[mask]
    selected = delays_s[mask]
    mean = float(np.sum(weights * selected) / np.sum(weights))
    variance = float(np.sum(weights * (selected - mean) ** 2) / np.sum(weights))
    return math.sqrt(variance)


def estimate_doppler(timestamps_s, peak_taps) -> float:
    """Doppler from the phase slope of a tap across consecutive captures.

    The capture spacing must be short enough that the path's phase
    advances less than half a cycle between samples (40 us slots keep
    +-12.5 kHz unambiguous). Weighted least squares on the unwrapped
    phase, weights proportional to tap power.
    """
    t = np.asarray(timestamps_s, dtype=np.float64)
    taps = np.asarray(peak_taps)
    if len(t) != len(taps) or len(t) < 2:
        raise ValueError("need matching timestamp/tap series of length >= 2")
    phase = np.unwrap(np.angle(taps))
    weights = np.abs(taps) ** 2
    if np.sum(weights) <= 0:
        raise ValueError("all-zero taps")
    t0 = t - t[0]
    w = weights / np.sum(weights)
    t_mean = np.sum(w * t0)
    p_mean = np.sum(w * phase)
    denom = np.sum(w * (t0 - t_mean) ** 2)
    if denom <= 0:
        raise ValueError("degenerate timestamps")
    slope = np.sum(w * (t0 - t_mean) * (phase - p_mean)) / denom
    return float(slope / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# CSV export


def write_rss_csv(table: BeamRssTable, fh) -> None:
    fh.write("gps_time,tx,rx_array,az,el,rss_dbm\n")
    for e in table.entries:
        fh.write(f"{e.timestamp_s:.9f},{e.tx_id},{e.rx_array_id},"
                 f"{e.beam_azimuth_deg:.3f},{e.beam_elevation_deg:.3f},{e.rss_dbm:.3f}\n")


def write_stacked_csv(stacked, fh) -> None:
    fh.write("tx,rx_array,tap_ns,power_db_rel\n")
    for s in stacked:
        for delay, power in zip(s.delays_ns, s.power_db_rel):
            fh.write(f"{s.tx_id},{s.rx_array_id},{delay:.3f},{power:.3f}\n")


def write_delay_spread_csv(rows, fh) -> None:
    fh.write("gps_time,tx,rx_array,beam_index,rms_delay_spread_ns\n")
    for (timestamp, tx, rx_array, beam_index, spread_s) in rows:
        fh.write(f"{timestamp:.9f},{tx},{rx_array},{beam_index},{spread_s * 1e9:.3f}\n")
