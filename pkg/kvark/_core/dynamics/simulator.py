from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import Field

from kvark._common._exceptions.kvark_exception import (
    InvalidInputError,
    JointLimitViolationError,
)
from kvark._common.constants import RK4_SUBSTEPS
from kvark._core._type_spec import (
    FloatArray,
    KvarkModel,
    ReferenceCallable,
    TorqueProfile,
)
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.models.friction import FrictionProfile
from kvark._core.models.trajectory import SampledTrajectory

AccelerationFn = Callable[[FloatArray, FloatArray], FloatArray]


class TrackingGains(KvarkModel):
    """
    Computed-torque PD gains, given as the closed-loop natural frequency and damping ratio.
    """

    natural_frequency: float = Field(default=50.0, gt=0.0)
    damping_ratio: float = Field(default=1.0, gt=0.0)

    @property
    def kp(self) -> float:
        return self.natural_frequency**2

    @property
    def kd(self) -> float:
        return 2.0 * self.damping_ratio * self.natural_frequency


def _sample_count(t_s: float, duration: float) -> int:
    if not t_s > 0.0:
        raise InvalidInputError(f"t_s must be positive, got {t_s}")
    count = int(round(duration / t_s))
    if count < 2:
        raise InvalidInputError(
            f"duration {duration} s at t_s={t_s} s yields fewer than two samples"
        )
    return count


def _rk4(
    accel: AccelerationFn, q: FloatArray, dq: FloatArray, h: float, substeps: int
) -> Tuple[FloatArray, FloatArray]:
    step = h / substeps
    for _ in range(substeps):
        k1_q, k1_v = dq, accel(q, dq)
        k2_q = dq + 0.5 * step * k1_v
        k2_v = accel(q + 0.5 * step * k1_q, k2_q)
        k3_q = dq + 0.5 * step * k2_v
        k3_v = accel(q + 0.5 * step * k2_q, k3_q)
        k4_q = dq + step * k3_v
        k4_v = accel(q + step * k3_q, k4_q)
        q = q + step / 6.0 * (k1_q + 2.0 * k2_q + 2.0 * k3_q + k4_q)
        dq = dq + step / 6.0 * (k1_v + 2.0 * k2_v + 2.0 * k3_v + k4_v)
    return q, dq


def rollout(
    model: ManipulatorModel,
    q0: FloatArray,
    dq0: FloatArray,
    torque_fn: Optional[TorqueProfile],
    t_s: float,
    duration: float,
    substeps: int = RK4_SUBSTEPS,
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    """
    Integrate the plant open loop under a zero-order-held net joint torque.

    Returns:
        Tuple[FloatArray, FloatArray, FloatArray]: Sample times, positions and velocities.
    """
    count = _sample_count(t_s, duration)
    q = model._vector("q0", q0)
    dq = model._vector("dq0", dq0)
    zeros = np.zeros(model.n)
    times = np.arange(count) * t_s
    positions = np.empty((count, model.n))
    velocities = np.empty((count, model.n))
    for k, t in enumerate(times):
        positions[k], velocities[k] = q, dq
        tau = zeros if torque_fn is None else np.asarray(torque_fn(float(t)), dtype=float)
        q, dq = _rk4(
            lambda qq, vv, tau=tau: model._forward_dynamics(qq, vv, tau),
            q,
            dq,
            t_s,
            substeps,
        )
    return times, positions, velocities


def simulate(
    model: ManipulatorModel,
    friction: FrictionProfile,
    reference: ReferenceCallable,
    tau_ext_profile: Optional[TorqueProfile],
    t_s: float,
    duration: float,
    seed: int,
    gains: Optional[TrackingGains] = None,
    substeps: int = RK4_SUBSTEPS,
) -> SampledTrajectory:
    """
    Track a joint reference with a computed-torque PD loop and record the sampled run.

    The command τ_m is computed from the measured state at every sample and held for the
    sample period, as is the residual-torque noise and τ_ext. The plant is integrated with
    RK4 over `substeps` substeps. The recorded q̈ is the plant acceleration at the sample
    instant, so τ_m − τ_EL(q, q̇, q̈) equals τ_ext + τ_r exactly.

    Args:
        model (ManipulatorModel): The simulated arm. The controller uses the same model.
        friction (FrictionProfile): Ground-truth residual torque generator.
        reference (ReferenceCallable): t -> (q_r, q̇_r, q̈_r).
        tau_ext_profile (Optional[TorqueProfile]): t -> τ_ext, or None for a free run.
        t_s (float): Sampling period in s.
        duration (float): Length of the run in s.
        seed (int): Seed of the residual-noise generator.
        gains (Optional[TrackingGains]): Tracking gains, defaults to ωn = 50 rad/s, ζ = 1.

    Raises:
        JointLimitViolationError: If the reference or the realised motion leaves the limits.

    Returns:
        SampledTrajectory: The recorded run including the τ_ext column.
    """
    if friction.n != model.n:
        raise InvalidInputError(
            f"friction profile has {friction.n} joints, the arm has {model.n}"
        )
    gains = gains or TrackingGains()
    count = _sample_count(t_s, duration)
    rng = np.random.default_rng(seed)
    n = model.n
    zeros = np.zeros(n)

    times = np.arange(count) * t_s
    q_log = np.empty((count, n))
    dq_log = np.empty((count, n))
    ddq_log = np.empty((count, n))
    tau_m_log = np.empty((count, n))
    tau_ext_log = np.empty((count, n))

    q_r, dq_r, _ = reference(0.0)
    q = np.array(q_r, dtype=float)
    dq = np.array(dq_r, dtype=float)
    logger.debug(f"Simulating {count} samples at t_s={t_s} s (seed {seed})")

    for k, t in enumerate(times):
        t = float(t)
        q_r, dq_r, ddq_r = (np.asarray(x, dtype=float) for x in reference(t))
        _check_limits(model, q_r, t, "q_ref")
        _check_limits(model, q, t, "q")

        command = ddq_r + gains.kd * (dq_r - dq) + gains.kp * (q_r - q)
        tau_m = model._mass_matrix(q) @ command + model._bias_torque(q, dq)
        tau_ext = (
            zeros
            if tau_ext_profile is None
            else np.asarray(tau_ext_profile(t), dtype=float)
        )
        noise = friction.sample_noise(dq, rng)
        drive = tau_m - tau_ext - noise

        q_log[k], dq_log[k] = q, dq
        ddq_log[k] = model._forward_dynamics(q, dq, drive - friction.deterministic(dq))
        tau_m_log[k], tau_ext_log[k] = tau_m, tau_ext

        if k + 1 < count:
            q, dq = _rk4(
                lambda qq, vv, drive=drive: model._forward_dynamics(
                    qq, vv, drive - friction.deterministic(vv)
                ),
                q,
                dq,
                t_s,
                substeps,
            )
            if not (np.all(np.isfinite(q)) and np.all(np.isfinite(dq))):
                raise InvalidInputError(f"simulation diverged after t={t:.6f} s")

    return SampledTrajectory(
        t_s=t_s,
        t=times,
        q=q_log,
        dq=dq_log,
        ddq=ddq_log,
        tau_m=tau_m_log,
        tau_ext=tau_ext_log,
    )


def _check_limits(model: ManipulatorModel, q: FloatArray, t: float, quantity: str) -> None:
    below = q < model.q_min
    above = q > model.q_max
    if np.any(below) or np.any(above):
        joint = int(np.argmax(below | above))
        raise JointLimitViolationError(
            joint=joint,
            time=t,
            quantity=quantity,
            value=float(q[joint]),
            lower=float(model.q_min[joint]),
            upper=float(model.q_max[joint]),
        )
