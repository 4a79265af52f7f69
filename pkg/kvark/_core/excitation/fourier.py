from typing import Tuple, Union

import numpy as np

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._common.constants import LOGDET_JITTER
from kvark._core._type_spec import FloatArray, ReferenceCallable, StateTriple
from kvark._core.models.excitation import FourierTrajectoryParams

TimeInput = Union[float, FloatArray]


def eval_trajectory(params: FourierTrajectoryParams, t: TimeInput) -> StateTriple:
    """
    Evaluate q, q̇ and q̈ of the Fourier trajectory analytically.

    A scalar `t` gives (n,) vectors; an array of T times gives (T, n) blocks.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0.0):
        raise InvalidInputError("trajectory time must be non-negative")
    omega = params.frequencies
    phase = np.outer(times, omega)
    sin, cos = np.sin(phase), np.cos(phase)
    q = params.midpoints + sin @ params.a.T + cos @ params.b.T
    dq = (cos * omega) @ params.a.T - (sin * omega) @ params.b.T
    ddq = -(sin * omega**2) @ params.a.T - (cos * omega**2) @ params.b.T
    if np.ndim(t) == 0:
        return q[0], dq[0], ddq[0]
    return q, dq, ddq


def as_reference(params: FourierTrajectoryParams) -> ReferenceCallable:
    def reference(t: float) -> StateTriple:
        return eval_trajectory(params, t)

    return reference


def state_cloud(params: FourierTrajectoryParams, grid: FloatArray) -> FloatArray:
    """Rows z_t = (q, q̇, q̈)(t) for every time in `grid`, shape (T, 3n)."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("the state-cloud grid must be a non-empty vector")
    q, dq, ddq = eval_trajectory(params, grid)
    return np.hstack([q, dq, ddq])


def logdet_objective(cloud: FloatArray) -> float:
    """
    J = −log det(Cov(cloud) + 1e-9·I) with the unbiased covariance estimator.

    Returns +inf when the jittered covariance is still not positive definite.
    """
    cloud = np.asarray(cloud, dtype=float)
    if cloud.ndim != 2:
        raise InvalidInputError("the state cloud must be a 2-D array")
    rows, dim = cloud.shape
    if rows < dim + 1:
        raise InvalidInputError(
            f"the state cloud needs at least {dim + 1} samples, got {rows}"
        )
    cov = np.atleast_2d(np.cov(cloud, rowvar=False, ddof=1))
    sign, logdet = np.linalg.slogdet(cov + LOGDET_JITTER * np.eye(dim))
    if sign <= 0.0 or not np.isfinite(logdet):
        return float("inf")
    return float(-logdet)


def time_grid(period: float, points: int) -> FloatArray:
    """`points` equally spaced times covering one period, the end point excluded."""
    return np.linspace(0.0, period, points, endpoint=False)


def limit_violation(
    params: FourierTrajectoryParams,
    limits: Tuple[FloatArray, FloatArray, FloatArray, FloatArray],
    grid: FloatArray,
) -> float:
    """
    Total amount by which q, q̇ and q̈ exceed their box limits, summed over joints and grid
    times. Zero exactly when the trajectory is feasible on the grid.
    """
    q_min, q_max, dq_max, ddq_max = limits
    q, dq, ddq = eval_trajectory(params, np.asarray(grid, dtype=float))
    excess = (
        np.maximum(q - q_max, 0.0).sum()
        + np.maximum(q_min - q, 0.0).sum()
        + np.maximum(np.abs(dq) - dq_max, 0.0).sum()
        + np.maximum(np.abs(ddq) - ddq_max, 0.0).sum()
    )
    return float(excess)


def is_feasible(
    params: FourierTrajectoryParams,
    limits: Tuple[FloatArray, FloatArray, FloatArray, FloatArray],
    grid: FloatArray,
) -> bool:
    return limit_violation(params, limits, grid) == 0.0
