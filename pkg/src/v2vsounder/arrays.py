"""Phased-array presets, beam codebooks, placements, and the gain model.

Coordinate conventions used across the package (documented once, here):

* Right-handed frame: x forward, y left, z up.
* Azimuth is measured counterclockwise from +x (vehicle forward axis),
  in degrees. Elevation is positive above the horizontal plane.
* Array-local azimuth is measured from the array boresight heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArraySpec",
    "Beam",
    "BeamCodebook",
    "ArrayPlacement",
    "tx_array_spec",
    "rx_array_spec",
    "build_rx_codebook",
    "build_tx_beams",
    "beam_gain",
    "relative_pattern_gain",
    "mount_arrays",
    "direction_unit_vector",
    "angle_between_deg",
    "ARRAY_HEIGHT_M",
    "RX_CODEBOOK_ROWS",
]

# Bumper-mount height: 15 inches.
ARRAY_HEIGHT_M = 0.381

# Default receive codebook layout: (elevation_deg, beams_in_row). The
# middle row is a pure azimuth cut at elevation 0 so the azimuth-sweep
# analysis slice exists exactly; rows total 29 beams within +-45 az,
# +-30 el.
RX_CODEBOOK_ROWS = ((-20.0, 9), (0.0, 11), (20.0, 9))

RX_AZ_LIMIT_DEG = 45.0
DEFAULT_RX_BEAMWIDTH_DEG = 13.0
DEFAULT_TX_BEAMWIDTH_DEG = 55.0


@dataclass(frozen=True)
class ArraySpec:
    """Composite description of one phased-array module."""

    element_count: int
    composite_boresight_gain_db: float
    pattern_model: str = "raised-cosine"  # or "upa-factor"
    polarization: str = "single"
    sidelobe_floor_db: float = 25.0  # relative floor below boresight

    def __post_init__(self):
        if self.element_count <= 0:
            raise ValueError("element_count must be positive")
        if not math.isfinite(self.composite_boresight_gain_db):
            raise ValueError("composite boresight gain must be finite")
        if self.pattern_model not in ("raised-cosine", "upa-factor"):
            raise ValueError(f"unknown pattern model {self.pattern_model!r}")


@dataclass(frozen=True)
class Beam:
    """One codebook entry, angles in the array-local frame."""

    azimuth_deg: float
    elevation_deg: float
    beamwidth_3db_deg: float
    index: int

    def __post_init__(self):
        if self.beamwidth_3db_deg <= 0:
            raise ValueError("beamwidth must be positive")


@dataclass(frozen=True)
class BeamCodebook:
    beams: tuple[Beam, ...]

    def __len__(self) -> int:
        return len(self.beams)

    def __getitem__(self, index: int) -> Beam:
        return self.beams[index]

    def elevation_row(self, elevation_deg: float, tol: float = 1e-9) -> tuple[Beam, ...]:
        return tuple(b for b in self.beams if abs(b.elevation_deg - elevation_deg) <= tol)


@dataclass(frozen=True)
class ArrayPlacement:
    """Where an array sits on the vehicle body and where it points."""

    name: str
    position_m: np.ndarray  # vehicle frame, z = mount height
    boresight_heading_deg: float  # relative to vehicle forward axis
    height_m: float = ARRAY_HEIGHT_M

    def __post_init__(self):
        if self.height_m <= 0:
            raise ValueError("mount height must be positive")
        pos = np.asarray(self.position_m, dtype=np.float64)
        object.__setattr__(self, "position_m", pos)
        pos.setflags(write=False)


def tx_array_spec() -> ArraySpec:
    """256-element transmit array preset, 59.1 dB composite chain gain."""
    return ArraySpec(element_count=256, composite_boresight_gain_db=59.1)


def rx_array_spec() -> ArraySpec:
    """64-element receive array preset, 47 dB composite gain."""
    return ArraySpec(element_count=64, composite_boresight_gain_db=47.0)


def build_rx_codebook(spec: ArraySpec,
                      beamwidth_deg: float = DEFAULT_RX_BEAMWIDTH_DEG,
                      rows=RX_CODEBOOK_ROWS,
                      az_limit_deg: float = RX_AZ_LIMIT_DEG) -> BeamCodebook:
    """Build the sweep codebook for one receive array.

    Beams are laid out in elevation rows, each row equispaced over
    [-az_limit, +az_limit], ordered by (elevation, azimuth) with a
    sequential index. The default layout yields 29 beams.
    """
    del spec  # layout is independent of the element count presets
    beams = []
    index = 0
    for elevation, count in sorted(rows, key=lambda r: r[0]):
        if count < 1:
            raise ValueError("each codebook row needs at least one beam")
        azimuths = np.linspace(-az_limit_deg, az_limit_deg, count)
        for az in azimuths:
            beams.append(Beam(azimuth_deg=float(az), elevation_deg=float(elevation),
                              beamwidth_3db_deg=beamwidth_deg, index=index))
            index += 1
    return BeamCodebook(beams=tuple(beams))


def build_tx_beams(vehicle_length_m: float = 4.57,
                   vehicle_width_m: float = 1.9,
                   beamwidth_deg: float = DEFAULT_TX_BEAMWIDTH_DEG):
    """Static transmit beams and their rear-corner placements.

    Returns a list of (Beam, ArrayPlacement) pairs: one per rear bumper
    corner, boresights mirror-symmetric about the longitudinal axis and
    pointed outward from the corners.
    """
    if vehicle_length_m <= 0 or vehicle_width_m <= 0:
        raise ValueError("vehicle dimensions must be positive")
    half_l = vehicle_length_m / 2.0
    half_w = vehicle_width_m / 2.0
    beam = Beam(azimuth_deg=0.0, elevation_deg=0.0,
                beamwidth_3db_deg=beamwidth_deg, index=0)
    placements = [
        ArrayPlacement("tx-rear-left", np.array([-half_l, half_w, ARRAY_HEIGHT_M]), 135.0),
        ArrayPlacement("tx-rear-right", np.array([-half_l, -half_w, ARRAY_HEIGHT_M]), -135.0),
    ]
    return [(beam, placements[0]), (beam, placements[1])]


def mount_arrays(vehicle) -> list[ArrayPlacement]:
    """Corner placements for a vehicle, by role.

    ``vehicle`` needs ``length_m``, ``width_m`` and ``role`` attributes.
    The receive vehicle gets four corner arrays whose boresights
    partition 360 degrees of azimuth; the transmit vehicle gets the two
    rear-corner arrays.
    """
    if vehicle.length_m <= 0 or vehicle.width_m <= 0:
        raise ValueError("vehicle dimensions must be positive")
    half_l = vehicle.length_m / 2.0
    half_w = vehicle.width_m / 2.0
    h = ARRAY_HEIGHT_M
    if vehicle.role == "rx":
        return [
            ArrayPlacement("front-left", np.array([half_l, half_w, h]), 45.0),
            ArrayPlacement("front-right", np.array([half_l, -half_w, h]), -45.0),
            ArrayPlacement("rear-left", np.array([-half_l, half_w, h]), 135.0),
            ArrayPlacement("rear-right", np.array([-half_l, -half_w, h]), -135.0),
        ]
    if vehicle.role == "tx":
        return [placement for _, placement in
                build_tx_beams(vehicle.length_m, vehicle.width_m)]
    raise ValueError(f"no array layout for vehicle role {vehicle.role!r}")


def direction_unit_vector(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array([math.cos(el) * math.cos(az),
                     math.cos(el) * math.sin(az),
                     math.sin(el)])


def angle_between_deg(az1: float, el1: float, az2: float, el2: float) -> float:
    """Great-circle angle between two (azimuth, elevation) directions."""
    u = direction_unit_vector(az1, el1)
    v = direction_unit_vector(az2, el2)
    return math.degrees(math.acos(min(1.0, max(-1.0, float(np.dot(u, v))))))


# Main-lobe shape constant: scaled so the raised-cosine pattern is
# exactly -3 dB at half the 3 dB beamwidth.
_RC_SCALE = math.acos(10.0 ** (-3.0 / 20.0))


def relative_pattern_gain(offset_deg: float, beamwidth_3db_deg: float,
                          sidelobe_floor_db: float = 25.0,
                          pattern_model: str = "raised-cosine",
                          element_count: int = 64) -> float:
    """Pattern gain in dB relative to boresight at an angular offset.

    raised-cosine: 20*log10(cos(k*theta)) with k set by the 3 dB
    beamwidth, clamped to -sidelobe_floor_db beyond the main lobe.

    upa-factor: separable square uniform-planar-array factor with
    half-wavelength spacing, steered width implied by the element count;
    provided behind the same interface for sensitivity studies.
    """
    offset = abs(offset_deg)
    if pattern_model == "raised-cosine":
        k = _RC_SCALE / math.radians(beamwidth_3db_deg / 2.0)
        x = k * math.radians(offset)
        if x >= math.pi / 2.0:
            return -sidelobe_floor_db
        return max(20.0 * math.log10(math.cos(x)), -sidelobe_floor_db)
    if pattern_model == "upa-factor":
        m = max(2, int(round(math.sqrt(element_count))))
        delta_u = abs(math.sin(math.radians(min(offset, 90.0))))
        arg = math.pi * 0.5 * delta_u  # half-wavelength spacing
        if arg < 1e-12:
            return 0.0
        af = abs(math.sin(m * arg) / (m * math.sin(arg)))
        if af <= 0.0:
            return -sidelobe_floor_db
        return max(20.0 * math.log10(af), -sidelobe_floor_db)
    raise ValueError(f"unknown pattern model {pattern_model!r}")


def beam_gain(spec: ArraySpec, beam: Beam, azimuth_deg: float, elevation_deg: float) -> float:
    """Composite gain in dB toward an array-local direction.

    Boresight of the beam carries the spec's full composite gain; the
    pattern rolls off with great-circle offset and floors at the spec's
    sidelobe level.
    """
    offset = angle_between_deg(azimuth_deg, elevation_deg,
                               beam.azimuth_deg, beam.elevation_deg)
    rel = relative_pattern_gain(offset, beam.beamwidth_3db_deg,
                                sidelobe_floor_db=spec.sidelobe_floor_db,
                                pattern_model=spec.pattern_model,
                                element_count=spec.element_count)
    return spec.composite_boresight_gain_db + rel
