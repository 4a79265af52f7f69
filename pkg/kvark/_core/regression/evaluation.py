import numpy as np

from kvark._common._exceptions.kvark_exception import SeriesMismatchError
from kvark._core._type_spec import FloatArray, KvarkModel
from kvark._core.protocol.regressor import ResidualRegressor

BAND_SIGMAS = 2.0


class ResidualFit(KvarkModel):
    """
    Held-out quality of a residual regressor.

    Attributes:
        rmse (float): Root-mean-square error of the predictive mean in N·m.
        coverage (float): Fraction of targets inside mean ± 2σ.
        mean_std (float): Average predictive standard deviation in N·m.
    """

    rmse: float
    coverage: float
    mean_std: float


def evaluate_regressor(
    regressor: ResidualRegressor, inputs: FloatArray, targets: FloatArray
) -> ResidualFit:
    """Score a scalar-output regressor on held-out (input, τ_r) rows."""
    targets = np.asarray(targets, dtype=float).ravel()
    means, covs = regressor.predict_many(inputs)
    if means.shape[0] != targets.shape[0]:
        raise SeriesMismatchError(
            f"{means.shape[0]} predictions for {targets.shape[0]} targets"
        )
    if targets.shape[0] == 0:
        raise SeriesMismatchError("cannot evaluate a regressor on an empty test set")
    std = np.sqrt(np.maximum(covs[:, 0, 0], 0.0))
    error = targets - means[:, 0]
    return ResidualFit(
        rmse=float(np.sqrt(np.mean(error**2))),
        coverage=float(np.mean(np.abs(error) <= BAND_SIGMAS * std)),
        mean_std=float(np.mean(std)),
    )
