from typing import List

import numpy as np
from pydantic import Field, model_validator

from kvark._common.constants import COVARIANCE_FLOOR
from kvark._core._type_spec import Array, KvarkModel

PD_TOLERANCE = 0.0
FLOOR_RTOL = 1e-9


class GaussianComponent(KvarkModel):
    """
    One weighted Gaussian of a mixture over joint (input, output) vectors.

    Attributes:
        weight (float): Mixing weight π in (0, 1].
        mean (Array): μ ∈ R^{d+o}.
        covariance (Array): Σ ∈ R^{(d+o)×(d+o)}, symmetric positive definite.
    """

    weight: float = Field(gt=0.0, le=1.0)
    mean: Array
    covariance: Array


class GmmModel(KvarkModel):
    """
    A fitted Gaussian mixture plus its fit metadata.

    Attributes:
        weights (Array): Mixing weights, shape (K,), summing to one.
        means (Array): Component means, shape (K, D).
        covariances (Array): Component covariances, shape (K, D, D).
        covariance_floor (float): Lower bound applied to covariance eigenvalues.
        seed (int): Seed of the k-means++ initialisation.
        iterations (int): EM iterations performed.
        log_likelihood (float): Final total log-likelihood of the training data.
        history (Array): Total log-likelihood after every E-step.
    """

    weights: Array
    means: Array
    covariances: Array
    covariance_floor: float = Field(default=COVARIANCE_FLOOR, ge=0.0)
    seed: int = 0
    iterations: int = Field(default=0, ge=0)
    log_likelihood: float = float("nan")
    history: Array = Field(default_factory=lambda: np.zeros(0))

    @model_validator(mode="after")
    def _shapes(self) -> "GmmModel":
        k = self.weights.shape[0]
        if self.weights.ndim != 1 or k < 1:
            raise ValueError("a mixture needs at least one weight")
        if self.means.ndim != 2 or self.means.shape[0] != k:
            raise ValueError(f"means must have shape ({k}, D), got {self.means.shape}")
        dim = self.means.shape[1]
        if self.covariances.shape != (k, dim, dim):
            raise ValueError(
                f"covariances must have shape ({k}, {dim}, {dim}), got {self.covariances.shape}"
            )
        if np.any(self.weights <= 0.0) or not np.isclose(self.weights.sum(), 1.0):
            raise ValueError("weights must be positive and sum to one")
        if not np.all(np.isfinite(self.covariances)):
            raise ValueError("covariances contain non-finite values")
        if not np.allclose(self.covariances, np.swapaxes(self.covariances, 1, 2)):
            raise ValueError("component covariances must be symmetric")
        eigenvalues = np.linalg.eigvalsh(self.covariances)
        slack = FLOOR_RTOL * np.maximum(1.0, eigenvalues[:, -1])
        smallest = eigenvalues[:, 0]
        if np.any(smallest <= PD_TOLERANCE) or np.any(smallest < self.covariance_floor - slack):
            raise ValueError(
                f"component covariances must be positive definite with eigenvalues of at least "
                f"{self.covariance_floor}, smallest is {float(smallest.min())}"
            )
        return self

    @property
    def n_components(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    @property
    def components(self) -> List[GaussianComponent]:
        return [
            GaussianComponent(weight=w, mean=m, covariance=c)
            for w, m, c in zip(self.weights, self.means, self.covariances)
        ]


class ReferenceTrajectory(KvarkModel):
    """
    N probabilistic support triples {s, μ̂, Σ̂} extracted by GMR.

    Attributes:
        inputs (Array): Support inputs s, shape (N, d).
        means (Array): Conditional means μ̂, shape (N, o).
        covariances (Array): Conditional covariances Σ̂, shape (N, o, o).
    """

    inputs: Array
    means: Array
    covariances: Array

    @model_validator(mode="after")
    def _well_formed(self) -> "ReferenceTrajectory":
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise ValueError("inputs must have shape (N, d) with N >= 1")
        size = self.inputs.shape[0]
        if self.means.ndim != 2 or self.means.shape[0] != size:
            raise ValueError(f"means must have shape ({size}, o), got {self.means.shape}")
        o = self.means.shape[1]
        if self.covariances.shape != (size, o, o):
            raise ValueError(
                f"covariances must have shape ({size}, {o}, {o}), got {self.covariances.shape}"
            )
        if not np.allclose(self.covariances, np.swapaxes(self.covariances, 1, 2)):
            raise ValueError("reference covariances must be symmetric")
        if np.min(np.linalg.eigvalsh(self.covariances)) <= PD_TOLERANCE:
            raise ValueError("reference covariances must be positive definite")
        if self.input_dim == 1 and size > 1 and np.any(np.diff(self.inputs[:, 0]) <= 0.0):
            raise ValueError("one-dimensional support inputs must be strictly increasing")
        return self

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.means.shape[1])
