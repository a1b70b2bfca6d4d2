"""Roll-control simulator for a two-section articulated-wing ornithopter."""

from .aero import AeroModel, AeroParams, Wrench, strip_force, total_wrench
from .frames import Pose, compose, mirror_xz, rot_axis_angle, transform_point, transform_vector
from .kinematics import (
    FlapDrive,
    TwistCommand,
    Washout,
    WingGeometry,
    flap_angles,
    make_strips,
    panel_poses,
)
from .sim import (
    SimSettings,
    Variant,
    VehicleConfig,
    compare_configs,
    cycle_average,
    m_static_oracle,
    roll_response,
    simulate_tethered,
    sweep,
)

__version__ = "0.1.0"
