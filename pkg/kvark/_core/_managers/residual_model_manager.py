from typing import Sequence, Tuple

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._core._type_spec import FloatArray
from kvark._core.protocol.regressor import ResidualRegressor


class ResidualModelManager:
    """
    Holds one scalar residual regressor per joint and answers the joint-wise query
    s_* = q̇_j with the stacked mean μ_* and the diagonal covariance Σ_*.
    """

    def __init__(self, models: Sequence[ResidualRegressor]) -> None:
        if len(models) == 0:
            raise InvalidInputError("at least one residual model is required")
        for j, model in enumerate(models):
            if model.input_dim != 1 or model.output_dim != 1:
                raise InvalidInputError(
                    f"residual model of joint {j + 1} must map R -> R, "
                    f"got R^{model.input_dim} -> R^{model.output_dim}"
                )
        self._models = tuple(models)
        logger.debug(
            f"Residual models ready: {[type(m).__name__ for m in self._models]}"
        )

    @property
    def models(self) -> Tuple[ResidualRegressor, ...]:
        return self._models

    @property
    def n(self) -> int:
        return len(self._models)

    def query(self, dq: FloatArray) -> Tuple[FloatArray, FloatArray]:
        """μ_* (n,) and diagonal Σ_* (n, n) at the joint velocities q̇."""
        dq = np.asarray(dq, dtype=float)
        if dq.shape != (self.n,):
            raise InvalidInputError(f"dq must have shape ({self.n},), got {dq.shape}")
        means = np.empty(self.n)
        variances = np.empty(self.n)
        for j, model in enumerate(self._models):
            prediction = model.predict(dq[j : j + 1])
            means[j] = prediction.mean[0]
            variances[j] = prediction.covariance[0, 0]
        return means, np.diag(variances)

    def mean(self, dq: FloatArray) -> FloatArray:
        return self.query(dq)[0]

    def static_mean(self) -> FloatArray:
        """Per-joint residual mean averaged over the training supports, shape (n,)."""
        return np.array(
            [float(np.mean(np.asarray(m.reference.means)[:, 0])) for m in self._models]
        )
