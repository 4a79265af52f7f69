from kvark._core.excitation.fourier import (
    as_reference,
    eval_trajectory,
    is_feasible,
    limit_violation,
    logdet_objective,
    state_cloud,
    time_grid,
)
from kvark._core.excitation.genetic import GaResult, ga_optimize
from kvark._core.excitation.problem import ExcitationProblem, optimize_excitation

__all__ = [
    "as_reference",
    "eval_trajectory",
    "is_feasible",
    "limit_violation",
    "logdet_objective",
    "state_cloud",
    "time_grid",
    "GaResult",
    "ga_optimize",
    "ExcitationProblem",
    "optimize_excitation",
]
