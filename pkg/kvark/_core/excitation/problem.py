from typing import Tuple

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._common.constants import (
    DEFAULT_GRID_POINTS,
    DEFAULT_HARMONICS,
    DEFAULT_PERIOD,
    DENSE_GRID_FACTOR,
)
from kvark._core._type_spec import FloatArray
from kvark._core.excitation.fourier import (
    limit_violation,
    logdet_objective,
    state_cloud,
    time_grid,
)
from kvark._core.excitation.genetic import GaResult, ga_optimize
from kvark._core.models.excitation import FourierTrajectoryParams, GaConfig
from kvark._core.models.manipulator import ArmSpec

Limits = Tuple[FloatArray, FloatArray, FloatArray, FloatArray]

SHRINK_FACTOR = 0.99
MAX_SHRINK_STEPS = 2000


class ExcitationProblem:
    """
    Fourier excitation design as a GA problem: maximise the log-determinant of the state
    cloud covariance subject to joint limits sampled on a time grid.

    Args:
        spec (ArmSpec): Arm whose joint limits bound the trajectory.
        harmonics (int): Number of harmonics K.
        period (float): Base period T in s.
        grid_points (int): Points of the optimisation grid over one period.
        margin (float): Fraction of each joint's half range kept free at both ends, leaving
            room for the tracking error of the realised motion.
    """

    def __init__(
        self,
        spec: ArmSpec,
        harmonics: int = DEFAULT_HARMONICS,
        period: float = DEFAULT_PERIOD,
        grid_points: int = DEFAULT_GRID_POINTS,
        margin: float = 0.05,
    ) -> None:
        q_min, q_max, dq_max, ddq_max = spec.limit_arrays()
        half_range = 0.5 * (q_max - q_min)
        self.midpoints = 0.5 * (q_min + q_max)
        self.limits: Limits = (
            q_min + margin * half_range,
            q_max - margin * half_range,
            dq_max,
            ddq_max,
        )
        self.harmonics = harmonics
        self.period = period
        self.grid = time_grid(period, grid_points)
        self.dense_grid = time_grid(period, grid_points * DENSE_GRID_FACTOR)

        omega = 2.0 * np.pi * np.arange(1, harmonics + 1) / period
        usable = (1.0 - margin) * half_range
        # every coefficient at this bound keeps the worst-case sum at twice the limit
        per_joint = np.minimum.reduce(
            [
                usable / harmonics,
                dq_max / omega.sum(),
                ddq_max / (omega**2).sum(),
            ]
        )
        self.coefficient_bound = np.tile(per_joint, 2 * harmonics)

    @property
    def dimension(self) -> int:
        return 2 * len(self.midpoints) * self.harmonics

    def params(self, x: FloatArray) -> FourierTrajectoryParams:
        return FourierTrajectoryParams.from_vector(
            x, self.midpoints, harmonics=self.harmonics, period=self.period
        )

    def objective(self, x: FloatArray) -> float:
        return logdet_objective(state_cloud(self.params(x), self.grid))

    def violation(self, x: FloatArray) -> float:
        return limit_violation(self.params(x), self.limits, self.grid)

    def sample(self, rng: np.random.Generator) -> FloatArray:
        return rng.uniform(-self.coefficient_bound, self.coefficient_bound)

    def enforce_dense_feasibility(self, x: FloatArray) -> FloatArray:
        """
        Shrink the coefficients toward the midpoint until the dense grid is feasible.

        Raises:
            InvalidInputError: If the trajectory is still infeasible after
                `MAX_SHRINK_STEPS` shrink steps.
        """
        shrunk = np.asarray(x, dtype=float)
        steps = 0
        while limit_violation(self.params(shrunk), self.limits, self.dense_grid) > 0.0:
            if steps >= MAX_SHRINK_STEPS:
                raise InvalidInputError(
                    f"excitation trajectory still violates the limits on the dense grid after "
                    f"{MAX_SHRINK_STEPS} shrink steps (factor {SHRINK_FACTOR ** steps:.3g})"
                )
            shrunk = shrunk * SHRINK_FACTOR
            steps += 1
        if steps:
            logger.warning(
                f"Excitation trajectory violated limits on the dense grid; coefficients scaled by {SHRINK_FACTOR ** steps:.4f}"
            )
        return shrunk


def optimize_excitation(
    spec: ArmSpec,
    config: GaConfig,
    harmonics: int = DEFAULT_HARMONICS,
    period: float = DEFAULT_PERIOD,
    grid_points: int = DEFAULT_GRID_POINTS,
    margin: float = 0.05,
) -> Tuple[FourierTrajectoryParams, GaResult]:
    """
    Run the GA on an `ExcitationProblem` and return parameters that are feasible on a grid
    `DENSE_GRID_FACTOR` times denser than the optimisation grid.
    """
    problem = ExcitationProblem(
        spec,
        harmonics=harmonics,
        period=period,
        grid_points=grid_points,
        margin=margin,
    )
    logger.info(
        f"Optimising a {harmonics}-harmonic excitation for {spec.n} joints "
        f"({config.population_size} x {config.generations}, seed {config.seed})"
    )
    result = ga_optimize(problem, config)
    best = problem.enforce_dense_feasibility(result.best)
    logger.success(f"Excitation objective {result.value:.6g} after {result.evaluations} evaluations")
    return problem.params(best), result
