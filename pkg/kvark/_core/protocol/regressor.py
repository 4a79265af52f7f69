from typing import Protocol, Tuple

from kvark._core._type_spec import FloatArray
from kvark._core.models.mixture import ReferenceTrajectory
from kvark._core.models.regression import Prediction


class ResidualRegressor(Protocol):
    """
    Protocol for the per-joint residual-torque models the observers query: a predictive
    mean and covariance for a query input (the joint velocity in the shipped pipeline).
    """

    @property
    def input_dim(self) -> int: ...

    @property
    def output_dim(self) -> int: ...

    @property
    def reference(self) -> ReferenceTrajectory: ...

    def predict(self, s: FloatArray) -> Prediction: ...

    def predict_many(self, inputs: FloatArray) -> Tuple[FloatArray, FloatArray]: ...
