from kvark._core.mixture.dataset import residual_dataset, train_test_split
from kvark._core.mixture.em import em_fit, log_likelihood, responsibilities
from kvark._core.mixture.gmr import (
    component_supports,
    conditional_moments,
    gmr_condition,
    support_grid,
)

__all__ = [
    "residual_dataset",
    "train_test_split",
    "em_fit",
    "log_likelihood",
    "responsibilities",
    "component_supports",
    "conditional_moments",
    "gmr_condition",
    "support_grid",
]
