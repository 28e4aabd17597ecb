"""Geometric multipath channel: path tracing and CIR synthesis.

Paths are resolved per (transmit array, receive array) pair from scene
geometry at a time instant: the direct route (attenuated per blocking
vehicle) plus one first-order image-method specular reflection per
vertical reflector panel. Tap synthesis band-limits each path onto the
sample grid with a periodic sinc, matching the cyclic correlation
processing downstream.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayPlacement
from .scenario import Pose, Scene, Vehicle, sample_track

__all__ = [
    "SPEED_OF_LIGHT",
    "Path",
    "PathSet",
    "ArrayPose",
    "free_space_path_loss",
    "path_doppler",
    "trace_paths",
    "synthesize_cir",
    "pathset_frequency_response",
    "noise_power_dbm",
    "pose_array",
]

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 2.998e8  # m/s

# Blockage tests shrink vehicle boxes by this inset so corner-mounted
# arrays and surface-grazing rays are not counted as penetrations.
_BOX_INSET_M = 0.01

LOS = "los"
BLOCKED_LOS = "blocked-los"
REFLECTED = "reflected"


@dataclass(frozen=True)
class Path:
    """One resolved propagation route."""

    delay_s: float
    gain_db: float  # includes FSPL, reflection loss, blockage loss
    aod_az_deg: float
    aod_el_deg: float
    aoa_az_deg: float
    aoa_el_deg: float
    doppler_hz: float
    kind: str  # los | blocked-los | reflected
    via: str = ""  # reflector id for reflected paths


@dataclass(frozen=True)
class PathSet:
    timestamp_s: float
    tx_array_id: str
    rx_array_id: str
    paths: tuple[Path, ...]

    def __post_init__(self):
        direct = [p for p in self.paths if p.kind in (LOS, BLOCKED_LOS)]
        if len(direct) > 1:
            raise ValueError("a path set may contain at most one direct path")

    @property
    def direct(self) -> Path | None:
        for p in self.paths:
            if p.kind in (LOS, BLOCKED_LOS):
                return p
        return None


@dataclass(frozen=True)
class ArrayPose:
    """World-frame state of one mounted array at a time instant."""

    array_id: str
    position_m: np.ndarray
    boresight_az_deg: float
    velocity_mps: np.ndarray
    vehicle_id: str

    def local_azimuth(self, world_az_deg: float) -> float:
        return _wrap_deg(world_az_deg - self.boresight_az_deg)


def _wrap_deg(angle: float) -> float:
    return (angle + 180.0) % 360.0 - 180.0


def _rot_z(heading_deg: float) -> np.ndarray:
    c = math.cos(math.radians(heading_deg))
    s = math.sin(math.radians(heading_deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def pose_array(placement: ArrayPlacement, vehicle_pose: Pose, vehicle_id: str) -> ArrayPose:
    """Resolve a body-mounted placement against the vehicle pose."""
    rot = _rot_z(vehicle_pose.heading_deg)
    position = vehicle_pose.position_m + rot @ placement.position_m
    return ArrayPose(array_id=placement.name, position_m=position,
                     boresight_az_deg=_wrap_deg(vehicle_pose.heading_deg +
                                                placement.boresight_heading_deg),
                     velocity_mps=vehicle_pose.velocity_mps, vehicle_id=vehicle_id)


def free_space_path_loss(distance_m: float, frequency_hz: float) -> float:
    """Friis free-space loss: 20*log10(4*pi*d*f/c) in dB."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    if frequency_hz <= 0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * frequency_hz / SPEED_OF_LIGHT)


def path_doppler(departure_unit: np.ndarray, arrival_unit: np.ndarray,
                 tx_velocity_mps: np.ndarray, rx_velocity_mps: np.ndarray,
                 frequency_hz: float) -> float:
    """Doppler shift from the first/last leg geometry of a route.

    ``departure_unit`` points along the first leg away from the
    transmitter; ``arrival_unit`` along the last leg toward the
    receiver. Closing geometry gives a positive shift.
    """
    radial = float(np.dot(tx_velocity_mps, departure_unit)
                   - np.dot(rx_velocity_mps, arrival_unit))
    return frequency_hz / SPEED_OF_LIGHT * radial


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise power over the sounding bandwidth, in dBm."""
    return -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


# ---------------------------------------------------------------------------
# Scene geometry at an instant


@dataclass(frozen=True)
class _Box:
    vehicle_id: str
    center_m: np.ndarray  # box center (z at half height)
    half_m: np.ndarray
    heading_deg: float

    def intersects_segment(self, p0: np.ndarray, p1: np.ndarray) -> bool:
        rot = _rot_z(-self.heading_deg)
        a = rot @ (p0 - self.center_m)
        b = rot @ (p1 - self.center_m)
        d = b - a
        t_enter, t_exit = 0.0, 1.0
        for axis in range(3):
            lo = -self.half_m[axis] + _BOX_INSET_M
            hi = self.half_m[axis] - _BOX_INSET_M
            if lo >= hi:
                return False
            if abs(d[axis]) < 1e-12:
                if not lo <= a[axis] <= hi:
                    return False
                continue
            t0 = (lo - a[axis]) / d[axis]
            t1 = (hi - a[axis]) / d[axis]
            if t0 > t1:
                t0, t1 = t1, t0
            t_enter = max(t_enter, t0)
            t_exit = min(t_exit, t1)
            if t_enter >= t_exit:
                return False
        return t_exit > 1e-9 and t_enter < 1.0 - 1e-9


@dataclass(frozen=True)
class _ReflectorPanel:
    panel_id: str
    owner_vehicle_id: str | None
    p0: np.ndarray  # (x, y)
    p1: np.ndarray
    z_min: float
    z_max: float
    loss_db: float
    outward: np.ndarray | None = None  # facing normal for body panels


def _vehicle_box(vehicle: Vehicle, pose: Pose) -> _Box:
    center = pose.position_m + np.array([0.0, 0.0, vehicle.height_m / 2.0])
    half = np.array([vehicle.length_m / 2.0, vehicle.width_m / 2.0, vehicle.height_m / 2.0])
    return _Box(vehicle_id=vehicle.vehicle_id, center_m=center, half_m=half,
                heading_deg=pose.heading_deg)


def _vehicle_side_panels(vehicle: Vehicle, pose: Pose) -> list[_ReflectorPanel]:
    rot = _rot_z(pose.heading_deg)[:2, :2]
    origin = pose.position_m[:2]
    half_l = vehicle.length_m / 2.0
    half_w = vehicle.width_m / 2.0
    panels = []
    for side, sign in (("left", 1.0), ("right", -1.0)):
        p0 = origin + rot @ np.array([-half_l, sign * half_w])
        p1 = origin + rot @ np.array([half_l, sign * half_w])
        panels.append(_ReflectorPanel(
            panel_id=f"{vehicle.vehicle_id}/{side}", owner_vehicle_id=vehicle.vehicle_id,
            p0=p0, p1=p1, z_min=0.0, z_max=vehicle.height_m, loss_db=0.0,
            outward=rot @ np.array([0.0, sign])))
    return panels


class _SceneSnapshot:
    """All boxes and reflector panels of a scene at one instant."""

    def __init__(self, scene: Scene, t: float):
        self.poses = {v.vehicle_id: sample_track(v.track, t) for v in scene.vehicles}
        self.boxes = {v.vehicle_id: _vehicle_box(v, self.poses[v.vehicle_id])
                      for v in scene.vehicles}
        self.panels: list[_ReflectorPanel] = [
            _ReflectorPanel(panel_id=p.panel_id, owner_vehicle_id=None,
                            p0=p.p0_m, p1=p.p1_m, z_min=p.z_min_m, z_max=p.z_max_m,
                            loss_db=p.reflection_loss_db)
            for p in scene.panels
        ]
        for v in scene.vehicles:
            if v.reflective:
                for panel in _vehicle_side_panels(v, self.poses[v.vehicle_id]):
                    self.panels.append(_ReflectorPanel(
                        panel.panel_id, panel.owner_vehicle_id, panel.p0, panel.p1,
                        panel.z_min, panel.z_max, scene.channel.reflection_loss_db,
                        outward=panel.outward))

    def blockers(self, p0: np.ndarray, p1: np.ndarray, exclude: set[str]) -> int:
        count = 0
        for vid, box in self.boxes.items():
            if vid in exclude:
                continue
            if box.intersects_segment(p0, p1):
                count += 1
        return count


def _angles_from_vector(v: np.ndarray) -> tuple[float, float]:
    az = math.degrees(math.atan2(v[1], v[0]))
    el = math.degrees(math.asin(max(-1.0, min(1.0, v[2] / np.linalg.norm(v)))))
    return az, el


def _mirror_point(point: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Mirror a 3D point across the vertical plane through segment p0-p1."""
    seg = p1 - p0
    seg = seg / np.linalg.norm(seg)
    normal = np.array([-seg[1], seg[0]])
    dist = float(np.dot(point[:2] - p0, normal))
    mirrored = point.copy()
    mirrored[:2] = point[:2] - 2.0 * dist * normal
    return mirrored


def _reflection_point(tx: np.ndarray, rx: np.ndarray, panel: _ReflectorPanel):
    """Image-method specular point on a panel, or None if it misses."""
    seg = panel.p1 - panel.p0
    normal = np.array([-seg[1], seg[0]])
    normal = normal / np.linalg.norm(normal)
    d_tx = float(np.dot(tx[:2] - panel.p0, normal))
    d_rx = float(np.dot(rx[:2] - panel.p0, normal))
    if abs(d_tx) < 1e-9 or abs(d_rx) < 1e-9 or d_tx * d_rx < 0:
        return None  # degenerate or endpoints on opposite sides
    image = _mirror_point(tx, panel.p0, panel.p1)
    direction = rx - image
    denom = float(np.dot(direction[:2], normal))
    if abs(denom) < 1e-12:
        return None
    t = -float(np.dot(image[:2] - panel.p0, normal)) / denom
    if not 0.0 < t < 1.0:
        return None
    point = image + t * direction
    seg_len = float(np.linalg.norm(seg))
    s = float(np.dot(point[:2] - panel.p0, seg / seg_len)) / seg_len
    if not 0.0 <= s <= 1.0:
        return None
    if not panel.z_min <= point[2] <= panel.z_max:
        return None
    return point


def trace_paths(scene: Scene, tx_pose: ArrayPose, rx_pose: ArrayPose, t: float) -> PathSet:
    """Resolve the direct route and first-order panel reflections.

    The direct path is marked blocked when the segment crosses any
    vehicle volume (penetration loss added per blocker); a reflection
    exists per panel whose specular point lies on the panel with both
    legs unblocked. The endpoint vehicles never block or reflect their
    own link.
    """
    snapshot = _SceneSnapshot(scene, t)
    params = scene.channel
    exclude = {tx_pose.vehicle_id, rx_pose.vehicle_id}
    tx = tx_pose.position_m
    rx = rx_pose.position_m

    delta = rx - tx
    distance = float(np.linalg.norm(delta))
    if distance < 1e-6:
        raise ValueError(f"degenerate geometry: zero distance between "
                         f"{tx_pose.array_id} and {rx_pose.array_id} at t={t}")

    paths = []
    unit = delta / distance
    n_blockers = snapshot.blockers(tx, rx, exclude)
    gain = -free_space_path_loss(distance, params.carrier_hz)
    kind = LOS
    if n_blockers:
        gain -= n_blockers * params.penetration_loss_db
        kind = BLOCKED_LOS
    aod = _angles_from_vector(delta)
    aoa = _angles_from_vector(-delta)
    doppler = path_doppler(unit, unit, tx_pose.velocity_mps, rx_pose.velocity_mps,
                           params.carrier_hz)
    paths.append(Path(delay_s=distance / SPEED_OF_LIGHT, gain_db=gain,
                      aod_az_deg=aod[0], aod_el_deg=aod[1],
                      aoa_az_deg=aoa[0], aoa_el_deg=aoa[1],
                      doppler_hz=doppler, kind=kind))

    for panel in snapshot.panels:
        if panel.owner_vehicle_id in exclude:
            continue
        if panel.outward is not None:
            # Vehicle body panels only reflect from their outward face.
            if float(np.dot(tx[:2] - panel.p0, panel.outward)) <= 0:
                continue
        point = _reflection_point(tx, rx, panel)
        if point is None:
            continue
        leg_out = point - tx
        leg_in = rx - point
        len_out = float(np.linalg.norm(leg_out))
        len_in = float(np.linalg.norm(leg_in))
        if len_out < 1e-6 or len_in < 1e-6:
            continue
        block_exclude = exclude | ({panel.owner_vehicle_id} if panel.owner_vehicle_id else set())
        if snapshot.blockers(tx, point, block_exclude):
            continue
        if snapshot.blockers(point, rx, block_exclude):
            continue
        route = len_out + len_in
        u_dep = leg_out / len_out
        u_arr = leg_in / len_in
        aod = _angles_from_vector(leg_out)
        aoa = _angles_from_vector(-leg_in)
        doppler = path_doppler(u_dep, u_arr, tx_pose.velocity_mps,
                               rx_pose.velocity_mps, params.carrier_hz)
        paths.append(Path(delay_s=route / SPEED_OF_LIGHT,
                          gain_db=-free_space_path_loss(route, params.carrier_hz)
                                  - panel.loss_db,
                          aod_az_deg=aod[0], aod_el_deg=aod[1],
                          aoa_az_deg=aoa[0], aoa_el_deg=aoa[1],
                          doppler_hz=doppler, kind=REFLECTED, via=panel.panel_id))

    paths.sort(key=lambda p: p.delay_s)
    return PathSet(timestamp_s=t, tx_array_id=tx_pose.array_id,
                   rx_array_id=rx_pose.array_id, paths=tuple(paths))


# ---------------------------------------------------------------------------
# Tap synthesis


def _path_amplitudes(pathset: PathSet, tx_beam_gains_db, rx_beam_gains_db,
                     carrier_hz: float):
    """Complex amplitude per path in sqrt-milliwatt units."""
    amps = []
    for p, g_tx, g_rx in zip(pathset.paths, tx_beam_gains_db, rx_beam_gains_db):
        level_db = p.gain_db + g_tx + g_rx
        amp = 10.0 ** (level_db / 20.0)
        phase = -2.0 * math.pi * carrier_hz * p.delay_s
        amps.append(amp * np.exp(1j * phase))
    return amps


def pathset_frequency_response(pathset: PathSet, tx_beam_gains_db, rx_beam_gains_db,
                               bandwidth_hz: float, n_taps: int, carrier_hz: float,
                               time_offset_s: float = 0.0):
    """Per-path baseband frequency responses on the centered FFT grid.

    Returns (list of complex spectra, list of kept paths, n_dropped).
    Paths whose delay exceeds the CIR window are dropped with a warning.
    """
    if len(tx_beam_gains_db) != len(pathset.paths) or len(rx_beam_gains_db) != len(pathset.paths):
        raise ValueError("per-path gain lists must match the path count")
    window_s = n_taps / bandwidth_hz
    freqs = np.fft.fftfreq(n_taps, d=1.0 / bandwidth_hz)
    spectra = []
    kept = []
    dropped = 0
    amps = _path_amplitudes(pathset, tx_beam_gains_db, rx_beam_gains_db, carrier_hz)
    for p, amp in zip(pathset.paths, amps):
        if p.delay_s >= window_s:
            dropped += 1
            log.warning("dropping path with delay %.1f ns beyond the %.1f ns CIR window "
                        "(%s -> %s)", p.delay_s * 1e9, window_s * 1e9,
                        pathset.tx_array_id, pathset.rx_array_id)
            continue
        rotation = np.exp(2j * math.pi * p.doppler_hz * time_offset_s)
        spectra.append(amp * rotation * np.exp(-2j * math.pi * freqs * p.delay_s))
        kept.append(p)
    return spectra, kept, dropped


def synthesize_cir(pathset: PathSet, tx_beam_gains_db, rx_beam_gains_db,
                   bandwidth_hz: float, duration_s: float, carrier_hz: float = 28.0e9,
                   time_offset_s: float = 0.0) -> np.ndarray:
    """Ground-truth tapped delay line on a 1/bandwidth grid.

    Each path contributes its link-budget amplitude at carrier phase
    -2*pi*f_c*delay, band-limited onto the grid with a periodic sinc;
    taps superpose coherently. Tap units are sqrt(mW), so |tap|^2 is
    milliwatts.
    """
    n_taps = int(round(duration_s * bandwidth_hz))
    if n_taps < 1:
        raise ValueError("CIR window must span at least one tap")
    spectra, _, _ = pathset_frequency_response(pathset, tx_beam_gains_db,
                                               rx_beam_gains_db, bandwidth_hz,
                                               n_taps, carrier_hz, time_offset_s)
    if not spectra:
        return np.zeros(n_taps, dtype=np.complex128)
    return np.fft.ifft(np.sum(spectra, axis=0))
