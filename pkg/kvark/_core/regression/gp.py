from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve

from kvark._common._exceptions.kvark_exception import (
    IllConditionedReferenceError,
    InvalidInputError,
)
from kvark._common.linalg import cholesky_with_jitter, symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.models.mixture import ReferenceTrajectory
from kvark._core.models.regression import GpDocument, GpHyperparams, Prediction
from kvark._core.regression.kernel import as_queries, as_query, kernel_matrix


class GpModel:
    """
    Dense GP regressor trained on GMR support triples: inputs s, targets μ̂ and per-point
    noise variances λ₁Σ̂, with a zero prior mean. Scalar outputs only.
    """

    def __init__(self, reference: ReferenceTrajectory, hyperparams: GpHyperparams) -> None:
        if reference.output_dim != 1:
            raise InvalidInputError(
                f"the GP baseline models scalar outputs, got o={reference.output_dim}"
            )
        if np.unique(reference.inputs, axis=0).shape[0] != reference.size:
            raise InvalidInputError("GP training inputs must be distinct")
        self._reference = reference
        self._hyperparams = hyperparams
        self._inputs = np.array(reference.inputs)
        self._targets = np.asarray(reference.means)[:, 0]
        self._noise = hyperparams.noise_scale * np.asarray(reference.covariances)[:, 0, 0]

        gram = kernel_matrix(
            self._inputs,
            self._inputs,
            hyperparams.length_scale,
            hyperparams.signal_variance,
        )
        try:
            self._factor = cholesky_with_jitter(
                symmetrize(gram + np.diag(self._noise)), "K + λ₁ diag(Σ̂)"
            )
        except LinAlgError as e:
            raise IllConditionedReferenceError(
                f"GP system is singular after jitter escalation: {e}"
            ) from e
        self._alpha = cho_solve(self._factor, self._targets)
        self._inverse = symmetrize(cho_solve(self._factor, np.eye(reference.size)))

    @property
    def reference(self) -> ReferenceTrajectory:
        return self._reference

    @property
    def hyperparams(self) -> GpHyperparams:
        return self._hyperparams

    @property
    def input_dim(self) -> int:
        return self._reference.input_dim

    @property
    def output_dim(self) -> int:
        return 1

    @property
    def factor(self):
        return self._factor

    def predict_scalar(self, s: FloatArray) -> Tuple[float, float]:
        query = as_query(s, self.input_dim)
        k = kernel_matrix(
            query[None, :],
            self._inputs,
            self._hyperparams.length_scale,
            self._hyperparams.signal_variance,
        )[0]
        mean = float(k @ self._alpha)
        variance = self._hyperparams.signal_variance - float(k @ self._inverse @ k)
        return mean, max(variance, 0.0)

    def predict(self, s: FloatArray) -> Prediction:
        mean, variance = self.predict_scalar(s)
        return Prediction(mean=np.array([mean]), covariance=np.array([[variance]]))

    def predict_many(self, inputs: FloatArray) -> Tuple[FloatArray, FloatArray]:
        queries = as_queries(inputs, self.input_dim)
        k = kernel_matrix(
            queries,
            self._inputs,
            self._hyperparams.length_scale,
            self._hyperparams.signal_variance,
        )
        means = k @ self._alpha
        variances = self._hyperparams.signal_variance - np.einsum(
            "mi,ij,mj->m", k, self._inverse, k
        )
        return means[:, None], np.maximum(variances, 0.0)[:, None, None]

    def to_document(self) -> GpDocument:
        return GpDocument(reference=self._reference, hyperparams=self._hyperparams)

    @classmethod
    def from_document(cls, document: GpDocument) -> "GpModel":
        return cls(document.reference, document.hyperparams)


def gp_train(
    reference: ReferenceTrajectory,
    length_scale: float,
    signal_variance: float,
    noise_scale: float,
) -> GpModel:
    """
    Raises:
        InvalidInputError: If the reference inputs repeat or the output is not scalar.
        IllConditionedReferenceError: If K + λ₁ diag(Σ̂) stays singular after jitter.
    """
    return GpModel(
        reference,
        GpHyperparams(
            length_scale=length_scale,
            signal_variance=signal_variance,
            noise_scale=noise_scale,
        ),
    )


def gp_predict(model: GpModel, s: FloatArray) -> Tuple[float, float]:
    return model.predict_scalar(s)
