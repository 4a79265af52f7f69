from kvark._core.dynamics.manipulator import (
    ManipulatorModel,
    PendulumArm,
    SerialChainArm,
    TwoLinkPlanarArm,
    build_arm,
)
from kvark._core.dynamics.residual import differentiated_acceleration, residual_torques
from kvark._core.dynamics.simulator import TrackingGains, rollout, simulate

__all__ = [
    "ManipulatorModel",
    "PendulumArm",
    "SerialChainArm",
    "TwoLinkPlanarArm",
    "build_arm",
    "differentiated_acceleration",
    "residual_torques",
    "TrackingGains",
    "rollout",
    "simulate",
]
