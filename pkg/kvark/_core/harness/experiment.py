import json
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import (
    ConfigurationError,
    MalformedFileError,
    StageError,
)
from kvark._core.dynamics.manipulator import ManipulatorModel, build_arm
from kvark._core.harness import stages
from kvark._core.harness.io import (
    load_document,
    load_estimates,
    load_trajectory,
    save_document,
    save_estimates,
    save_trajectory,
)
from kvark._core.harness.metrics import observer_metrics
from kvark._core.models.excitation import FourierTrajectoryParams
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.observer import EstimateTrace
from kvark._core.models.regression import GpDocument, KmpDocument
from kvark._core.models.report import (
    BenchReport,
    MetricsReport,
    ObserverTiming,
)
from kvark._core.models.trajectory import SampledTrajectory
from kvark._core.regression.gp import GpModel
from kvark._core.regression.kmp import KmpModel

PathLike = Union[str, Path]


class ArtifactLayout:
    """File names inside one experiment's output directory."""

    def __init__(self, root: PathLike) -> None:
        self.root = Path(root)

    @property
    def config(self) -> Path:
        return self.root / "config.json"

    def excitation(self, index: int) -> Path:
        return self.root / f"excitation_{index}.json"

    def training(self, index: int) -> Path:
        return self.root / f"training_{index}.csv"

    @property
    def evaluation(self) -> Path:
        return self.root / "evaluation.csv"

    @property
    def evaluation_free(self) -> Path:
        return self.root / "evaluation_free.csv"

    def model(self, kind: str, joint: int) -> Path:
        return self.root / "models" / f"{kind}_joint{joint + 1}.json"

    @property
    def residual_fit(self) -> Path:
        return self.root / "residual_fit.json"

    @property
    def filter_config(self) -> Path:
        return self.root / "filter_config.json"

    def estimates(self, observer: str) -> Path:
        return self.root / f"estimates_{observer}.csv"

    @property
    def report(self) -> Path:
        return self.root / "report.json"

    @property
    def timing(self) -> Path:
        return self.root / "timing.json"

    @property
    def bench(self) -> Path:
        return self.root / "bench.json"

    def excitation_files(self) -> List[Path]:
        files = []
        while self.excitation(len(files)).exists():
            files.append(self.excitation(len(files)))
        return files

    def training_files(self) -> List[Path]:
        files = []
        while self.training(len(files)).exists():
            files.append(self.training(len(files)))
        return files


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any failure inside the block with the pipeline stage it happened in."""
    logger.info(f"Stage {name}")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        logger.error(f"Stage {name} failed: {e}")
        raise StageError(name, e) from e
    logger.success(f"Stage {name} done")


def run_excite(
    config: ExperimentConfig, layout: ArtifactLayout
) -> List[FourierTrajectoryParams]:
    """Optimise the excitations, write them and their realised free-motion runs."""
    arm = build_arm(config.arm)
    with stage("excite"):
        excitations = [params for params, _ in stages.excite(config, config.seed)]
        for index, params in enumerate(excitations):
            save_document(params, layout.excitation(index))
    with stage("simulate"):
        training = stages.simulate_training(config, arm, excitations, config.seed)
        for index, trajectory in enumerate(training):
            save_trajectory(trajectory, layout.training(index))
    return excitations


def _load_excitations(layout: ArtifactLayout) -> List[FourierTrajectoryParams]:
    files = layout.excitation_files()
    if not files:
        raise MalformedFileError(f"no excitation_<i>.json files in {layout.root}")
    return [load_document(path, FourierTrajectoryParams) for path in files]


def run_simulate(
    config: ExperimentConfig,
    layout: ArtifactLayout,
    excitations: Optional[Sequence[FourierTrajectoryParams]] = None,
) -> Tuple[List[SampledTrajectory], SampledTrajectory]:
    """Simulate the training runs and the evaluation run, reading stored excitations if needed."""
    arm = build_arm(config.arm)
    with stage("simulate"):
        if excitations is None:
            excitations = _load_excitations(layout)
        training = stages.simulate_training(config, arm, excitations, config.seed)
        for index, trajectory in enumerate(training):
            save_trajectory(trajectory, layout.training(index))
        evaluation, free = stages.simulate_evaluation(config, arm, excitations[0], config.seed)
        save_trajectory(evaluation, layout.evaluation)
        if free is not None:
            save_trajectory(free, layout.evaluation_free)
    return training, evaluation


def _training_runs(config: ExperimentConfig, layout: ArtifactLayout) -> List[SampledTrajectory]:
    if config.trajectory_files is not None:
        return [load_trajectory(path) for path in config.trajectory_files]
    files = layout.training_files()
    if not files:
        raise MalformedFileError(f"no training_<i>.csv files in {layout.root}")
    return [load_trajectory(path) for path in files]


def run_train(
    config: ExperimentConfig,
    layout: ArtifactLayout,
    training: Optional[Sequence[SampledTrajectory]] = None,
) -> stages.ResidualModels:
    """Fit and write the per-joint GMM, KMP and GP models and their held-out scores."""
    arm = build_arm(config.arm)
    with stage("train"):
        if training is None:
            training = _training_runs(config, layout)
        models = stages.train(config, arm, training, config.seed)
        for j in range(arm.n):
            save_document(models.gmms[j], layout.model("gmm", j))
            save_document(models.kmps[j].to_document(), layout.model("kmp", j))
            save_document(models.gps[j].to_document(), layout.model("gp", j))
        save_document(models.fit, layout.residual_fit)
    return models


def _load_regressors(
    layout: ArtifactLayout, n: int
) -> Tuple[List[KmpModel], List[GpModel]]:
    kmps = [
        KmpModel.from_document(load_document(layout.model("kmp", j), KmpDocument))
        for j in range(n)
    ]
    gps = [
        GpModel.from_document(load_document(layout.model("gp", j), GpDocument))
        for j in range(n)
    ]
    return kmps, gps


def run_estimate(
    config: ExperimentConfig,
    layout: ArtifactLayout,
    evaluation: Optional[SampledTrajectory] = None,
    regressors: Optional[Tuple[Sequence[KmpModel], Sequence[GpModel]]] = None,
) -> Tuple[Dict[str, EstimateTrace], Dict[str, ObserverTiming]]:
    """Run the observers on the evaluation run and write one estimates CSV each."""
    arm = build_arm(config.arm)
    from_files = regressors is None
    with stage("estimate"):
        if evaluation is None:
            evaluation = load_trajectory(layout.evaluation)
        kmps, gps = _load_regressors(layout, arm.n) if from_files else regressors
        # always derived from the current KMP models
        filter_settings = stages.filter_config(config, kmps, evaluation.t_s)
        save_document(filter_settings, layout.filter_config)
        traces, timing = stages.estimate(config, arm, evaluation, kmps, gps, filter_settings)
        for name, trace in traces.items():
            save_estimates(trace, evaluation.t_s, layout.estimates(name))
    return traces, timing


def build_report(
    seed: int,
    arm: ManipulatorModel,
    evaluation: SampledTrajectory,
    traces: Dict[str, EstimateTrace],
    timing: Optional[Dict[str, ObserverTiming]] = None,
) -> MetricsReport:
    return MetricsReport(
        seed=seed,
        samples=len(evaluation),
        observers={
            name: observer_metrics(arm, evaluation, trace) for name, trace in traces.items()
        },
        timing=timing,
    )


def _write_report(report: MetricsReport, layout: ArtifactLayout) -> None:
    save_document(report, layout.report)
    if report.timing is not None:
        timing = {name: value.model_dump() for name, value in report.timing.items()}
        layout.timing.write_text(json.dumps(timing, indent=2) + "\n")


def run_experiment(
    config: ExperimentConfig,
    excitations: Optional[Sequence[FourierTrajectoryParams]] = None,
) -> MetricsReport:
    """
    The full pipeline, excite → simulate → train → estimate → report, for every configured
    observer on identical data. Every artifact lands in `config.output_dir`.

    Given `excitations`, the GA is skipped and those trajectories are stored and used.

    Raises:
        StageError: Wrapping the first failure, tagged with its stage.
    """
    layout = ArtifactLayout(config.output_dir)
    layout.root.mkdir(parents=True, exist_ok=True)
    save_document(config, layout.config)
    logger.info(f"Experiment seed {config.seed} -> {layout.root}")

    with stage("excite"):
        if excitations is None:
            excitations = [params for params, _ in stages.excite(config, config.seed)]
        for index, params in enumerate(excitations):
            save_document(params, layout.excitation(index))
    simulated, evaluation = run_simulate(config, layout, excitations)
    # stored trajectory files replace the simulated training runs
    training = simulated if config.trajectory_files is None else None
    models = run_train(config, layout, training)
    traces, timing = run_estimate(
        config, layout, evaluation, regressors=(models.kmps, models.gps)
    )
    with stage("report"):
        report = build_report(config.seed, build_arm(config.arm), evaluation, traces, timing)
        _write_report(report, layout)
    return report


def recompute_report(output_dir: PathLike) -> MetricsReport:
    """Rebuild and rewrite `report.json` from the stored estimate traces and ground truth."""
    layout = ArtifactLayout(output_dir)
    with stage("report"):
        config = load_document(layout.config, ExperimentConfig)
        arm = build_arm(config.arm)
        evaluation = load_trajectory(layout.evaluation)
        traces = {}
        for name in config.observers:
            trace, t_s = load_estimates(layout.estimates(name))
            if t_s != evaluation.t_s:
                raise MalformedFileError(
                    f"estimates of {name} sampled at {t_s} s, evaluation at {evaluation.t_s} s"
                )
            traces[name] = trace
        report = build_report(config.seed, arm, evaluation, traces)
        save_document(report, layout.report)
    return report


def bench(
    config: ExperimentConfig,
    seeds: Optional[Sequence[int]] = None,
    output_dir: Optional[PathLike] = None,
) -> BenchReport:
    """
    Run the experiment once per seed and average the per-joint RMSE of every observer.

    The excitations are designed once with `config.seed` and shared by every seed, which
    then only changes the simulated noise and the EM initialisation.

    The improvement of K-VARK over a baseline is 1 − mean RMSE(kvark) / mean RMSE(baseline).
    """
    seeds = list(config.bench_seeds if seeds is None else seeds)
    if not seeds:
        raise ConfigurationError("bench needs at least one seed")
    root = Path(output_dir or config.output_dir)
    with stage("excite"):
        excitations = [params for params, _ in stages.excite(config, config.seed)]
    logger.info(
        f"Bench over seeds {seeds} with {len(excitations)} excitations designed at seed {config.seed}"
    )
    per_seed: Dict[str, List[List[float]]] = {name: [] for name in config.observers}
    for seed in seeds:
        run = config.with_seed(seed).with_output_dir(root / f"seed_{seed}")
        report = run_experiment(run, excitations)
        for name, metrics in report.observers.items():
            per_seed[name].append(metrics.joint_rmse)

    mean_joint = {name: np.mean(values, axis=0).tolist() for name, values in per_seed.items()}
    mean_rmse = {name: float(np.mean(values)) for name, values in mean_joint.items()}
    improvement = {}
    if "kvark" in mean_rmse:
        improvement = {
            name: 1.0 - mean_rmse["kvark"] / value
            for name, value in mean_rmse.items()
            if name != "kvark" and value > 0.0
        }
    result = BenchReport(
        seeds=seeds,
        mean_joint_rmse=mean_joint,
        mean_rmse=mean_rmse,
        improvement=improvement,
    )
    save_document(result, ArtifactLayout(root).bench)
    for name, value in improvement.items():
        logger.success(f"kvark vs {name}: {100.0 * value:+.1f}% RMSE reduction")
    return result
