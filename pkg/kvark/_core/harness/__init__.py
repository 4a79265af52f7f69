from kvark._core.harness.experiment import (
    ArtifactLayout,
    bench,
    build_report,
    recompute_report,
    run_estimate,
    run_excite,
    run_experiment,
    run_simulate,
    run_train,
)
from kvark._core.harness.io import (
    dumps_document,
    load_document,
    load_estimates,
    load_trajectory,
    loads_document,
    save_document,
    save_estimates,
    save_trajectory,
)
from kvark._core.harness.metrics import (
    cartesian_rmse,
    ground_truth_ext,
    observer_metrics,
    rmse,
)

__all__ = [
    "ArtifactLayout",
    "bench",
    "build_report",
    "recompute_report",
    "run_estimate",
    "run_excite",
    "run_experiment",
    "run_simulate",
    "run_train",
    "dumps_document",
    "load_document",
    "load_estimates",
    "load_trajectory",
    "loads_document",
    "save_document",
    "save_estimates",
    "save_trajectory",
    "cartesian_rmse",
    "ground_truth_ext",
    "observer_metrics",
    "rmse",
]
