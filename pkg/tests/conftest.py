import numpy as np
import pytest
import yaml

from v2vsounder import channel as ch
from v2vsounder.scenario import load_scenario


def vehicle_entry(vehicle_id, x, y, vx=0.0, vy=0.0, length=4.57, width=1.9,
                  height=1.8, heading=0.0, reflective=False, t_end=10.0):
    return {
        "id": vehicle_id, "length_m": length, "width_m": width, "height_m": height,
        "reflective": reflective, "heading_deg": heading,
        "waypoints": [{"t_s": 0.0, "x_m": x, "y_m": y},
                      {"t_s": t_end, "x_m": x + vx * t_end, "y_m": y + vy * t_end}],
    }


def scene_text(vehicles, panels=None, channel=None, sounder=None,
               tx="tx-van", rx="rx-van", name="test-scene"):
    cfg = {"name": name, "tx_vehicle": tx, "rx_vehicle": rx, "vehicles": vehicles}
    if panels:
        cfg["panels"] = panels
    if channel:
        cfg["channel"] = channel
    if sounder:
        cfg["sounder"] = sounder
    return yaml.safe_dump(cfg, sort_keys=True)


def make_scene(vehicles, **kwargs):
    return load_scenario(scene_text(vehicles, **kwargs))


def array_pose(name, x, y, z=0.381, boresight=0.0, velocity=(0.0, 0.0, 0.0),
               vehicle_id="none"):
    return ch.ArrayPose(array_id=name, position_m=np.array([x, y, z], dtype=float),
                        boresight_az_deg=boresight,
                        velocity_mps=np.array(velocity, dtype=float),
                        vehicle_id=vehicle_id)


@pytest.fixture
def open_road_scene():
    return make_scene([
        vehicle_entry("tx-van", 104.57, 0.0),
        vehicle_entry("rx-van", 0.0, 0.0),
    ])
