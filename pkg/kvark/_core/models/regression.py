from dataclasses import dataclass

from pydantic import Field

from kvark._core._type_spec import FloatArray, KvarkModel
from kvark._core.models.mixture import ReferenceTrajectory


class KmpHyperparams(KvarkModel):
    """
    The four KMP hyperparameters.

    Attributes:
        length_scale (float): l, which divides the squared input distance in the kernel
            exponent (a squared length, in input units²).
        signal_variance (float): σ_f², in output units².
        lambda_mean (float): λ₁, regulariser of the predictive mean.
        lambda_variance (float): λ₂, regulariser of the predictive covariance.
    """

    length_scale: float = Field(gt=0.0)
    signal_variance: float = Field(gt=0.0)
    lambda_mean: float = Field(ge=0.0)
    lambda_variance: float = Field(gt=0.0)


class GpHyperparams(KvarkModel):
    """
    Kernel and noise settings of the GP baseline.

    Attributes:
        length_scale (float): l, as in `KmpHyperparams`.
        signal_variance (float): σ_f².
        noise_scale (float): λ₁, multiplying the reference variances Σ̂ to give the
            per-point observation noise.
    """

    length_scale: float = Field(gt=0.0)
    signal_variance: float = Field(gt=0.0)
    noise_scale: float = Field(ge=0.0)


class KmpDocument(KvarkModel):
    """Everything needed to rebuild a `KmpModel` bit for bit."""

    reference: ReferenceTrajectory
    hyperparams: KmpHyperparams


class GpDocument(KvarkModel):
    """Everything needed to rebuild a `GpModel` bit for bit."""

    reference: ReferenceTrajectory
    hyperparams: GpHyperparams


@dataclass(frozen=True)
class Prediction:
    """
    Predictive mean and covariance of a residual regressor at one query input.

    Attributes:
        mean (FloatArray): μ_*, shape (o,).
        covariance (FloatArray): Σ_*, shape (o, o), symmetric positive semi-definite.
    """

    mean: FloatArray
    covariance: FloatArray
