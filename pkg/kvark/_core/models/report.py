from typing import Dict, List, Optional

import numpy as np
from pydantic import Field, model_validator

from kvark._core.regression.evaluation import ResidualFit
from kvark._core._type_spec import KvarkModel


class ObserverTiming(KvarkModel):
    """Wall-clock time of one observer's online loop in s."""

    total: float = Field(ge=0.0)
    per_sample: float = Field(ge=0.0)


class ObserverMetrics(KvarkModel):
    """
    Accuracy of one observer on the evaluation run.

    Attributes:
        joint_rmse (List[float]): Per-joint external-torque RMSE in N·m.
        cartesian_axes (List[str]): Task-space axis labels of the arm.
        cartesian_rmse (List[float]): Per-axis wrench RMSE (N or N·m).
        cartesian_aggregate (float): Euclidean norm of `cartesian_rmse`.
        cartesian_samples (int): Samples that entered the Cartesian figures; singular
            configurations are skipped.
        nis_consistency (float): Fraction of NIS values inside the central 95% band.
    """

    joint_rmse: List[float]
    cartesian_axes: List[str]
    cartesian_rmse: List[float]
    cartesian_aggregate: float
    cartesian_samples: int = Field(ge=0)
    nis_consistency: float

    @model_validator(mode="after")
    def _consistent(self) -> "ObserverMetrics":
        if any(value < 0.0 for value in self.joint_rmse + self.cartesian_rmse):
            raise ValueError("RMSE values must be non-negative")
        if len(self.cartesian_axes) != len(self.cartesian_rmse):
            raise ValueError("one Cartesian RMSE per task axis is required")
        aggregate = float(np.linalg.norm(self.cartesian_rmse))
        if not np.isclose(self.cartesian_aggregate, aggregate, rtol=1e-12, equal_nan=True):
            raise ValueError("cartesian_aggregate must be the norm of the per-axis RMSEs")
        return self


class MetricsReport(KvarkModel):
    """
    Result of one experiment. Timing is kept in memory only so that the persisted report
    is a deterministic function of the seeds.

    Attributes:
        seed (int): Master seed of the run.
        samples (int): Length of the evaluation run.
        observers (Dict[str, ObserverMetrics]): Accuracy per observer.
        timing (Optional[Dict[str, ObserverTiming]]): Online-loop timing per observer.
    """

    seed: int
    samples: int
    observers: Dict[str, ObserverMetrics]
    timing: Optional[Dict[str, ObserverTiming]] = Field(default=None, exclude=True)


class ResidualFitReport(KvarkModel):
    """Held-out residual-model quality, one entry per joint and regressor (`gmr`, `gp`, `kmp`)."""

    joints: List[Dict[str, ResidualFit]]


class BenchReport(KvarkModel):
    """
    Several seeds of the same experiment.

    Attributes:
        seeds (List[int]): Seeds that were run.
        mean_joint_rmse (Dict[str, List[float]]): Per-joint RMSE averaged over seeds.
        mean_rmse (Dict[str, float]): Mean over joints of `mean_joint_rmse`.
        improvement (Dict[str, float]): 1 − RMSE(kvark) / RMSE(baseline) per baseline.
    """

    seeds: List[int]
    mean_joint_rmse: Dict[str, List[float]]
    mean_rmse: Dict[str, float]
    improvement: Dict[str, float]
