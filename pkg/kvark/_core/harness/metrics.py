from typing import Tuple

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import (
    SeriesMismatchError,
    SingularConfigurationError,
)
from kvark._core._type_spec import FloatArray
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.models.observer import EstimateTrace
from kvark._core.models.report import ObserverMetrics
from kvark._core.models.trajectory import SampledTrajectory
from kvark._core.observer.recursion import nis_consistency


def ground_truth_ext(
    tau_loaded: SampledTrajectory, tau_free: SampledTrajectory
) -> FloatArray:
    """
    External torque of a loaded run as τ_loaded − τ_free against a matched free run
    following the same reference.

    Raises:
        SeriesMismatchError: If the runs differ in length, sampling period or joints.
    """
    if len(tau_loaded) != len(tau_free):
        raise SeriesMismatchError(
            f"loaded run has {len(tau_loaded)} samples, free run {len(tau_free)}"
        )
    if tau_loaded.t_s != tau_free.t_s:
        raise SeriesMismatchError(
            f"loaded run sampled at {tau_loaded.t_s} s, free run at {tau_free.t_s} s"
        )
    if tau_loaded.n != tau_free.n:
        raise SeriesMismatchError(
            f"loaded run has {tau_loaded.n} joints, free run {tau_free.n}"
        )
    return np.asarray(tau_loaded.tau_m) - np.asarray(tau_free.tau_m)


def rmse(estimates: FloatArray, truth: FloatArray) -> FloatArray:
    """Per-channel root-mean-square error of two (T, n) series."""
    estimates = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimates.ndim == 1:
        estimates, truth = estimates[:, None], truth.reshape(-1, 1)
    if estimates.shape != truth.shape:
        raise SeriesMismatchError(
            f"estimates {estimates.shape} and truth {truth.shape} differ in shape"
        )
    if estimates.shape[0] == 0:
        raise SeriesMismatchError("cannot compute the RMSE of an empty series")
    return np.sqrt(np.mean((estimates - truth) ** 2, axis=0))


def cartesian_rmse(
    arm: ManipulatorModel, q: FloatArray, tau_hat: FloatArray, tau_true: FloatArray
) -> Tuple[FloatArray, int]:
    """
    Per-axis RMSE of the task-space wrenches J⁻ᵀτ̂ and J⁻ᵀτ.

    Samples in singular configurations are skipped with a warning.

    Returns:
        Tuple[FloatArray, int]: The per-axis RMSE (NaN if nothing was usable) and the number
        of samples used.
    """
    errors = []
    skipped = 0
    for q_k, hat_k, true_k in zip(q, tau_hat, tau_true):
        try:
            errors.append(arm.cartesian_wrench(q_k, hat_k - true_k))
        except SingularConfigurationError:
            skipped += 1
    if skipped:
        logger.warning(f"Skipped {skipped} singular samples in the Cartesian RMSE")
    axes = len(arm.task_axes)
    if not errors:
        return np.full(axes, np.nan), 0
    return np.sqrt(np.mean(np.square(errors), axis=0)), len(errors)


def observer_metrics(
    arm: ManipulatorModel, evaluation: SampledTrajectory, trace: EstimateTrace
) -> ObserverMetrics:
    """Score one estimate trace against the τ_ext column of the evaluation run."""
    if evaluation.tau_ext is None:
        raise SeriesMismatchError("the evaluation run carries no ground-truth τ_ext")
    if len(evaluation) != trace.t.shape[0]:
        raise SeriesMismatchError(
            f"trace of {trace.observer} has {trace.t.shape[0]} samples, "
            f"evaluation run {len(evaluation)}"
        )
    per_axis, used = cartesian_rmse(arm, evaluation.q, trace.tau_hat, evaluation.tau_ext)
    return ObserverMetrics(
        joint_rmse=rmse(trace.tau_hat, evaluation.tau_ext).tolist(),
        cartesian_axes=list(arm.task_axes),
        cartesian_rmse=per_axis.tolist(),
        cartesian_aggregate=float(np.linalg.norm(per_axis)),
        cartesian_samples=used,
        nis_consistency=nis_consistency(trace.nis, trace.n),
    )
