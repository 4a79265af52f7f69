import sys
from loguru import logger

from kvark._core.dynamics import (
    ManipulatorModel,
    PendulumArm,
    SerialChainArm,
    TwoLinkPlanarArm,
    build_arm,
    residual_torques,
    simulate,
)
from kvark._core.excitation import eval_trajectory, ga_optimize, optimize_excitation
from kvark._core.harness import bench, recompute_report, run_experiment
from kvark._core.mixture import em_fit, gmr_condition
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.friction import FrictionProfile
from kvark._core.models.manipulator import ArmSpec, JointLimits, LinkParameters
from kvark._core.models.observer import EstimateTrace, FilterConfig, FilterState
from kvark._core.models.trajectory import SampledTrajectory
from kvark._core.observer import (
    GmrGpObserver,
    InnovationAkfObserver,
    KvarkObserver,
    StaticKfObserver,
    kvark_step,
)
from kvark._core.regression import GpModel, KmpModel, gp_train, kmp_train

logger.remove()

fmt = "<green>{time: HH:mm:ss.SSS}</green> | <level>{level: <8}</level>- <level>{message}</level>"

logger.add(sys.stderr, level="INFO", format=fmt)


__all__ = [
    "ManipulatorModel",
    "PendulumArm",
    "SerialChainArm",
    "TwoLinkPlanarArm",
    "build_arm",
    "residual_torques",
    "simulate",
    "eval_trajectory",
    "ga_optimize",
    "optimize_excitation",
    "bench",
    "recompute_report",
    "run_experiment",
    "em_fit",
    "gmr_condition",
    "ExperimentConfig",
    "FrictionProfile",
    "ArmSpec",
    "JointLimits",
    "LinkParameters",
    "EstimateTrace",
    "FilterConfig",
    "FilterState",
    "SampledTrajectory",
    "GmrGpObserver",
    "InnovationAkfObserver",
    "KvarkObserver",
    "StaticKfObserver",
    "kvark_step",
    "GpModel",
    "KmpModel",
    "gp_train",
    "kmp_train",
]
