import numpy as np

from kvark._core._type_spec import FloatArray
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.models.trajectory import SampledTrajectory


def residual_torques(
    model: ManipulatorModel, trajectory: SampledTrajectory
) -> FloatArray:
    """τ_r = τ_m − τ_EL(q, q̇, q̈) for every sample, shape (T, n)."""
    nominal = np.array(
        [
            model._inverse_dynamics(q, dq, ddq)
            for q, dq, ddq in zip(trajectory.q, trajectory.dq, trajectory.ddq)
        ]
    )
    return trajectory.tau_m - nominal


def differentiated_acceleration(
    trajectory: SampledTrajectory, velocity_noise_std: float = 0.0, seed: int = 0
) -> SampledTrajectory:
    """
    Replace the exact q̈ with the central difference of the (optionally noise-corrupted)
    velocity, the way an encoder-based pipeline would obtain it.

    The returned trajectory carries the corrupted q̇ as well.
    """
    rng = np.random.default_rng(seed)
    dq = np.asarray(trajectory.dq)
    if velocity_noise_std > 0.0:
        dq = dq + velocity_noise_std * rng.standard_normal(dq.shape)
    ddq = np.gradient(dq, trajectory.t_s, axis=0)
    return SampledTrajectory(
        t_s=trajectory.t_s,
        t=trajectory.t,
        q=trajectory.q,
        dq=dq,
        ddq=ddq,
        tau_m=trajectory.tau_m,
        tau_ext=trajectory.tau_ext,
    )
