import numpy as np
import pytest

from kvark._core._managers.residual_model_manager import ResidualModelManager
from kvark._core.dynamics.manipulator import build_arm
from kvark._core.models.friction import FrictionProfile
from kvark._core.models.manipulator import ArmSpec, JointLimits, LinkParameters
from kvark._core.models.mixture import ReferenceTrajectory
from kvark._core.models.regression import KmpHyperparams
from kvark._core.regression.gp import gp_train
from kvark._core.regression.kmp import kmp_train

WIDE_LIMITS = JointLimits(q_min=-3.0, q_max=3.0, dq_max=10.0, ddq_max=100.0)


@pytest.fixture(scope="session")
def pendulum_spec():
    """Unit point mass on a massless unit rod."""
    return ArmSpec(
        kind="pendulum",
        links=(LinkParameters(mass=1.0, length=1.0, com=1.0, inertia=0.0),),
        limits=(JointLimits(q_min=-1.5, q_max=1.5, dq_max=5.0, ddq_max=50.0),),
    )


@pytest.fixture(scope="session")
def pendulum(pendulum_spec):
    return build_arm(pendulum_spec)


@pytest.fixture(scope="session")
def planar_links():
    return (
        LinkParameters(mass=2.0, length=0.5, com=0.25, inertia=0.05),
        LinkParameters(mass=1.5, length=0.4, com=0.2, inertia=0.03),
    )


@pytest.fixture(scope="session")
def planar(planar_links):
    return build_arm(
        ArmSpec(kind="planar2", links=planar_links, limits=(WIDE_LIMITS, WIDE_LIMITS))
    )


@pytest.fixture(scope="session")
def planar_chain(planar_links):
    """The planar arm expressed as a spatial chain rotating about −y."""
    return build_arm(
        ArmSpec(kind="chain", links=planar_links, limits=(WIDE_LIMITS, WIDE_LIMITS))
    )


def zero_reference(
    low: float = -3.0, high: float = 3.0, points: int = 7, variance: float = 1e-2
) -> ReferenceTrajectory:
    return ReferenceTrajectory(
        inputs=np.linspace(low, high, points)[:, None],
        means=np.zeros((points, 1)),
        covariances=np.full((points, 1, 1), variance),
    )


@pytest.fixture
def zero_kmp_models():
    """One zero-mean KMP residual model per joint, for runs without friction."""

    def build(n: int) -> ResidualModelManager:
        hyperparams = KmpHyperparams(
            length_scale=0.1, signal_variance=1.0, lambda_mean=0.1, lambda_variance=1e3
        )
        return ResidualModelManager([kmp_train(zero_reference(), hyperparams) for _ in range(n)])

    return build


@pytest.fixture
def zero_gp_models():
    def build(n: int) -> ResidualModelManager:
        return ResidualModelManager(
            [gp_train(zero_reference(), 0.1, 1.0, 0.1) for _ in range(n)]
        )

    return build


@pytest.fixture(scope="session")
def no_friction():
    def build(n: int) -> FrictionProfile:
        return FrictionProfile.zero(n)

    return build
