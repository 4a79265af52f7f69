from kvark._core.regression.evaluation import ResidualFit, evaluate_regressor
from kvark._core.regression.gmr_regressor import GmrRegressor
from kvark._core.regression.gp import GpModel, gp_predict, gp_train
from kvark._core.regression.kernel import kernel_matrix, se_kernel
from kvark._core.regression.kmp import KmpModel, kmp_predict, kmp_train

__all__ = [
    "ResidualFit",
    "evaluate_regressor",
    "GmrRegressor",
    "GpModel",
    "gp_predict",
    "gp_train",
    "kernel_matrix",
    "se_kernel",
    "KmpModel",
    "kmp_predict",
    "kmp_train",
]
