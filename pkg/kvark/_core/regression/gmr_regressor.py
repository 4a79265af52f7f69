from typing import Tuple

import numpy as np

from kvark._common.linalg import clamp_psd
from kvark._core._type_spec import FloatArray
from kvark._core.mixture.gmr import conditional_moments
from kvark._core.models.mixture import GmmModel
from kvark._core.models.regression import Prediction
from kvark._core.regression.kernel import as_queries, as_query


class GmrRegressor:
    """The GMR conditional itself, used as a residual regressor for model evaluation."""

    def __init__(self, gmm: GmmModel, input_dim: int = 1) -> None:
        self._gmm = gmm
        self._input_dim = input_dim

    @property
    def gmm(self) -> GmmModel:
        return self._gmm

    @property
    def input_dim(self) -> int:
        return self._input_dim

    @property
    def output_dim(self) -> int:
        return self._gmm.dim - self._input_dim

    def predict(self, s: FloatArray) -> Prediction:
        query = as_query(s, self._input_dim)
        means, covs = conditional_moments(self._gmm, query[None, :])
        return Prediction(mean=means[0], covariance=clamp_psd(covs[0]))

    def predict_many(self, inputs: FloatArray) -> Tuple[FloatArray, FloatArray]:
        means, covs = conditional_moments(self._gmm, as_queries(inputs, self._input_dim))
        return means, np.stack([clamp_psd(c) for c in covs])
