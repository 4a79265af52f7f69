import math
from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from kvark._common.constants import DEFAULT_HARMONICS, DEFAULT_PERIOD
from kvark._core._type_spec import Array, FloatArray, KvarkModel


class FourierTrajectoryParams(KvarkModel):
    """
    Periodic joint trajectory q_j(t) = q̄_j + Σ_κ a_{j,κ} sin(ω_κ t) + b_{j,κ} cos(ω_κ t),
    with ω_κ = 2πκ/T.

    Attributes:
        midpoints (Array): q̄ per joint in rad, shape (n,).
        a (Array): Sine coefficients in rad, shape (n, K).
        b (Array): Cosine coefficients in rad, shape (n, K).
        period (float): Base period T in s.
    """

    midpoints: Array
    a: Array
    b: Array
    period: float = Field(default=DEFAULT_PERIOD, gt=0.0)

    @model_validator(mode="after")
    def _shapes(self) -> "FourierTrajectoryParams":
        if self.midpoints.ndim != 1:
            raise ValueError("midpoints must be a vector")
        n = self.midpoints.shape[0]
        if self.a.ndim != 2 or self.a.shape[0] != n or self.a.shape[1] < 1:
            raise ValueError(f"a must have shape ({n}, K), got {self.a.shape}")
        if self.b.shape != self.a.shape:
            raise ValueError(f"b must have shape {self.a.shape}, got {self.b.shape}")
        return self

    @property
    def n(self) -> int:
        return int(self.midpoints.shape[0])

    @property
    def harmonics(self) -> int:
        return int(self.a.shape[1])

    @property
    def frequencies(self) -> FloatArray:
        return 2.0 * math.pi * np.arange(1, self.harmonics + 1) / self.period

    @classmethod
    def from_vector(
        cls,
        theta: FloatArray,
        midpoints: FloatArray,
        harmonics: int = DEFAULT_HARMONICS,
        period: float = DEFAULT_PERIOD,
    ) -> "FourierTrajectoryParams":
        n = len(midpoints)
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (2 * n * harmonics,):
            raise ValueError(
                f"expected a parameter vector of length {2 * n * harmonics}, got {theta.shape}"
            )
        half = n * harmonics
        return cls(
            midpoints=midpoints,
            a=theta[:half].reshape(n, harmonics),
            b=theta[half:].reshape(n, harmonics),
            period=period,
        )

    @classmethod
    def zero(
        cls,
        midpoints: FloatArray,
        harmonics: int = DEFAULT_HARMONICS,
        period: float = DEFAULT_PERIOD,
    ) -> "FourierTrajectoryParams":
        zeros = np.zeros((len(midpoints), harmonics))
        return cls(midpoints=midpoints, a=zeros, b=zeros, period=period)


class GaConfig(KvarkModel):
    """
    Settings of the genetic algorithm.

    Attributes:
        population_size (int): Individuals per generation.
        generations (int): Number of generations, the first being the initial population.
        tournament_size (int): Contestants per tournament selection.
        crossover_rate (float): Probability that a child is a blend of two parents.
        mutation_rate (float): Per-gene probability of a Gaussian perturbation.
        mutation_std (float): Standard deviation of the perturbation in rad.
        penalty_weight (float): Weight of the total limit violation added to the objective.
        elite_count (int): Best individuals copied unchanged into the next generation.
        workers (Optional[int]): Thread count for fitness evaluation, None for serial.
        seed (int): Master seed.
    """

    population_size: int = Field(default=50, ge=1)
    generations: int = Field(default=100, ge=1)
    tournament_size: int = Field(default=3, ge=1)
    crossover_rate: float = Field(default=0.9, ge=0.0, le=1.0)
    mutation_rate: float = Field(default=0.2, ge=0.0, le=1.0)
    mutation_std: float = Field(default=0.02, ge=0.0)
    penalty_weight: float = Field(default=1e3, ge=0.0)
    elite_count: int = Field(default=1, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _elites_fit(self) -> "GaConfig":
        if self.elite_count > self.population_size:
            raise ValueError("elite_count cannot exceed population_size")
        return self
