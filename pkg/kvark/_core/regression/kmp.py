from typing import Tuple

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, block_diag, cho_solve

from kvark._common._exceptions.kvark_exception import IllConditionedReferenceError
from kvark._common.linalg import clamp_psd, cholesky_with_jitter, symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.models.mixture import ReferenceTrajectory
from kvark._core.models.regression import KmpDocument, KmpHyperparams, Prediction
from kvark._core.regression.kernel import as_queries, as_query, kernel_matrix


class KmpModel:
    """
    Kernelized movement primitive over a probabilistic reference.

    Training builds the block Gram matrix 𝒦 = K ⊗ I_o, the block-diagonal reference
    covariance Σ and the stacked mean μ, and caches the Cholesky factors of 𝒦 + λ₁Σ and
    𝒦 + λ₂Σ together with w₁ = (𝒦 + λ₁Σ)⁻¹μ. Prediction is then

        μ_* = k_*ᵀ w₁,    Σ_* = (N/λ₂)(k_** − k_*(𝒦 + λ₂Σ)⁻¹k_*ᵀ).

    Far from every support k_* vanishes and Σ_* tends to (N/λ₂)σ_f² I_o.
    Instances are immutable and safe to share between threads.
    """

    def __init__(self, reference: ReferenceTrajectory, hyperparams: KmpHyperparams) -> None:
        self._reference = reference
        self._hyperparams = hyperparams
        size, o = reference.size, reference.output_dim
        self._size = size
        self._o = o
        self._inputs = np.array(reference.inputs)

        gram = kernel_matrix(
            self._inputs,
            self._inputs,
            hyperparams.length_scale,
            hyperparams.signal_variance,
        )
        block_gram = np.kron(gram, np.eye(o))
        sigma = block_diag(*reference.covariances)
        stacked_mean = np.asarray(reference.means).ravel()

        self._mean_factor = self._factorize(
            symmetrize(block_gram + hyperparams.lambda_mean * sigma), "K + λ₁Σ"
        )
        self._variance_factor = self._factorize(
            symmetrize(block_gram + hyperparams.lambda_variance * sigma), "K + λ₂Σ"
        )
        self._w1 = cho_solve(self._mean_factor, stacked_mean)
        self._w1_blocks = self._w1.reshape(size, o)
        # (N, o, N, o) so the covariance quadratic form is a single einsum
        self._variance_inverse = symmetrize(
            cho_solve(self._variance_factor, np.eye(size * o))
        ).reshape(size, o, size, o)
        self._scale = size / hyperparams.lambda_variance
        logger.debug(
            f"Trained KMP on {size} supports (d={reference.input_dim}, o={o}, "
            f"l={hyperparams.length_scale}, σ_f²={hyperparams.signal_variance}, "
            f"λ₁={hyperparams.lambda_mean}, λ₂={hyperparams.lambda_variance})"
        )

    @staticmethod
    def _factorize(matrix: FloatArray, what: str):
        try:
            return cholesky_with_jitter(matrix, what)
        except LinAlgError as e:
            raise IllConditionedReferenceError(
                f"{what} is not positive definite after jitter escalation: {e}"
            ) from e

    @property
    def reference(self) -> ReferenceTrajectory:
        return self._reference

    @property
    def hyperparams(self) -> KmpHyperparams:
        return self._hyperparams

    @property
    def input_dim(self) -> int:
        return self._reference.input_dim

    @property
    def output_dim(self) -> int:
        return self._o

    def predict(self, s: FloatArray) -> Prediction:
        query = as_query(s, self.input_dim)
        k = kernel_matrix(
            query[None, :],
            self._inputs,
            self._hyperparams.length_scale,
            self._hyperparams.signal_variance,
        )[0]
        mean = k @ self._w1_blocks
        quad = np.einsum("i,iajb,j->ab", k, self._variance_inverse, k)
        cov = self._scale * (self._hyperparams.signal_variance * np.eye(self._o) - quad)
        return Prediction(mean=mean, covariance=clamp_psd(cov))

    def predict_many(self, inputs: FloatArray) -> Tuple[FloatArray, FloatArray]:
        """Vectorised `predict`: means (M, o) and covariances (M, o, o)."""
        queries = as_queries(inputs, self.input_dim)
        k = kernel_matrix(
            queries,
            self._inputs,
            self._hyperparams.length_scale,
            self._hyperparams.signal_variance,
        )
        means = k @ self._w1_blocks
        quad = np.einsum("mi,iajb,mj->mab", k, self._variance_inverse, k)
        covs = self._scale * (
            self._hyperparams.signal_variance * np.eye(self._o)[None, :, :] - quad
        )
        return means, np.stack([clamp_psd(c) for c in covs])

    def asymptotic_variance(self) -> FloatArray:
        """Far-field limit (N/λ₂)σ_f² I_o of the predictive covariance."""
        return self._scale * self._hyperparams.signal_variance * np.eye(self._o)

    def to_document(self) -> KmpDocument:
        return KmpDocument(reference=self._reference, hyperparams=self._hyperparams)

    @classmethod
    def from_document(cls, document: KmpDocument) -> "KmpModel":
        return cls(document.reference, document.hyperparams)


def kmp_train(reference: ReferenceTrajectory, hyperparams: KmpHyperparams) -> KmpModel:
    """
    Train a KMP on a GMR reference.

    Raises:
        IllConditionedReferenceError: If a regularised Gram matrix cannot be factorised
            even after one jitter escalation.
    """
    return KmpModel(reference, hyperparams)


def kmp_predict(model: KmpModel, s: FloatArray) -> Prediction:
    return model.predict(s)
