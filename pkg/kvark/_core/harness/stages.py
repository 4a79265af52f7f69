from dataclasses import dataclass
from time import perf_counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import ConfigurationError
from kvark._core._managers.residual_model_manager import ResidualModelManager
from kvark._core._type_spec import ReferenceCallable
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.dynamics.simulator import simulate
from kvark._core.excitation.fourier import as_reference, eval_trajectory
from kvark._core.excitation.genetic import GaResult
from kvark._core.excitation.problem import optimize_excitation
from kvark._core.harness.metrics import ground_truth_ext
from kvark._core.mixture.dataset import residual_dataset, train_test_split
from kvark._core.mixture.em import em_fit
from kvark._core.mixture.gmr import component_supports, gmr_condition, support_grid
from kvark._core.models.excitation import FourierTrajectoryParams
from kvark._core.models.experiment import ExperimentConfig
from kvark._core.models.mixture import GmmModel
from kvark._core.models.observer import EstimateTrace, FilterConfig
from kvark._core.models.regression import KmpHyperparams
from kvark._core.models.report import ObserverTiming, ResidualFitReport
from kvark._core.models.trajectory import SampledTrajectory
from kvark._core.observer.observers import build_observer
from kvark._core.regression.evaluation import evaluate_regressor
from kvark._core.regression.gmr_regressor import GmrRegressor
from kvark._core.regression.gp import GpModel, gp_train
from kvark._core.regression.kmp import KmpModel, kmp_train

STAGES = ("excite", "simulate", "train", "estimate", "report")
_STAGE_CODES = {"excite": 1, "simulate": 2, "train": 3, "estimate": 4, "report": 5}


def stage_seed(seed: int, stage: str, index: int = 0) -> int:
    """Independent, reproducible 32-bit seed for one use inside one stage."""
    sequence = np.random.SeedSequence([seed, _STAGE_CODES[stage], index])
    return int(sequence.generate_state(1)[0])


@dataclass(frozen=True)
class ResidualModels:
    """
    Outcome of the offline phase, one entry per joint.

    Attributes:
        gmms (List[GmmModel]): Fitted mixtures over (features, τ_r).
        kmps (List[KmpModel]): KMP regressors over the GMR references.
        gps (List[GpModel]): GP baselines over the same references.
        fit (ResidualFitReport): Held-out quality of the GMR, GP and KMP means.
    """

    gmms: List[GmmModel]
    kmps: List[KmpModel]
    gps: List[GpModel]
    fit: ResidualFitReport


def excite(
    config: ExperimentConfig, seed: int
) -> List[Tuple[FourierTrajectoryParams, GaResult]]:
    """Optimise `config.excitation.trajectories` independent excitation trajectories."""
    settings = config.excitation
    results = []
    for index in range(settings.trajectories):
        ga = config.ga.model_copy(update={"seed": stage_seed(seed, "excite", index)})
        results.append(
            optimize_excitation(
                config.arm,
                ga,
                harmonics=settings.harmonics,
                period=settings.period,
                grid_points=settings.grid_points,
                margin=settings.margin,
            )
        )
    return results


def simulate_training(
    config: ExperimentConfig,
    arm: ManipulatorModel,
    excitations: Sequence[FourierTrajectoryParams],
    seed: int,
) -> List[SampledTrajectory]:
    """Free-motion runs along every excitation trajectory."""
    return [
        simulate(
            arm,
            config.friction,
            as_reference(params),
            None,
            config.scenario.t_s,
            config.excitation.duration,
            stage_seed(seed, "simulate", index),
            gains=config.scenario.gains,
        )
        for index, params in enumerate(excitations)
    ]


def evaluation_reference(
    config: ExperimentConfig, params: FourierTrajectoryParams
) -> ReferenceCallable:
    """The first excitation, shrunk about its midpoints and shifted in time."""
    scale = config.scenario.amplitude_scale
    phase = config.scenario.phase
    shrunk = FourierTrajectoryParams(
        midpoints=params.midpoints, a=scale * params.a, b=scale * params.b, period=params.period
    )

    def reference(t: float):
        return eval_trajectory(shrunk, t + phase)

    return reference


def simulate_evaluation(
    config: ExperimentConfig,
    arm: ManipulatorModel,
    params: FourierTrajectoryParams,
    seed: int,
) -> Tuple[SampledTrajectory, Optional[SampledTrajectory]]:
    """
    The loaded evaluation run, with its τ_ext column holding the ground truth, and in
    `difference` mode the matched free run the truth was derived from.
    """
    scenario = config.scenario
    reference = evaluation_reference(config, params)
    n = arm.n
    loaded = simulate(
        arm,
        config.friction,
        reference,
        lambda t: scenario.tau_ext(t, n),
        scenario.t_s,
        scenario.duration,
        stage_seed(seed, "simulate", 1000),
        gains=scenario.gains,
    )
    if scenario.truth == "injected":
        return loaded, None
    free = simulate(
        arm,
        config.friction,
        reference,
        None,
        scenario.t_s,
        scenario.duration,
        stage_seed(seed, "simulate", 1001),
        gains=scenario.gains,
    )
    return loaded.with_tau_ext(ground_truth_ext(loaded, free)), free


def train(
    config: ExperimentConfig,
    arm: ManipulatorModel,
    training: Sequence[SampledTrajectory],
    seed: int,
) -> ResidualModels:
    """
    Offline phase per joint: residual rows, held-out split, EM, GMR reference, KMP and GP.
    """
    settings = config.residual_model
    n = arm.n
    d = len(settings.features)
    length_scale = settings.per_joint("length_scale", n)
    signal_variance = settings.per_joint("signal_variance", n)
    lambda_mean = settings.per_joint("lambda_mean", n)
    lambda_variance = settings.per_joint("lambda_variance", n)

    gmms, kmps, gps, fits = [], [], [], []
    for j in range(n):
        data = residual_dataset(training, arm, j, settings.features)
        train_rows, test_rows = train_test_split(
            data.shape[0], settings.test_fraction, stage_seed(seed, "train", 2 * j)
        )
        gmm = em_fit(
            data[train_rows],
            settings.components,
            stage_seed(seed, "train", 2 * j + 1),
            max_iterations=settings.em_max_iterations,
            tol=settings.em_tol,
        )
        supports = (
            support_grid(data[train_rows, 0], settings.support_points)
            if d == 1
            else component_supports(gmm, d)
        )
        reference = gmr_condition(gmm, supports)
        kmp = kmp_train(
            reference,
            KmpHyperparams(
                length_scale=float(length_scale[j]),
                signal_variance=float(signal_variance[j]),
                lambda_mean=float(lambda_mean[j]),
                lambda_variance=float(lambda_variance[j]),
            ),
        )
        gp = gp_train(
            reference, float(length_scale[j]), float(signal_variance[j]), float(lambda_mean[j])
        )
        inputs, targets = data[test_rows, :d], data[test_rows, d]
        fits.append(
            {
                "gmr": evaluate_regressor(GmrRegressor(gmm, d), inputs, targets),
                "gp": evaluate_regressor(gp, inputs, targets),
                "kmp": evaluate_regressor(kmp, inputs, targets),
            }
        )
        logger.info(
            f"Joint {j + 1}: held-out RMSE gmr={fits[-1]['gmr'].rmse:.4g} "
            f"gp={fits[-1]['gp'].rmse:.4g} kmp={fits[-1]['kmp'].rmse:.4g} N·m"
        )
        gmms.append(gmm)
        kmps.append(kmp)
        gps.append(gp)
    return ResidualModels(gmms=gmms, kmps=kmps, gps=gps, fit=ResidualFitReport(joints=fits))


def filter_config(
    config: ExperimentConfig, kmps: Sequence[KmpModel], t_s: float
) -> FilterConfig:
    """
    Filter parameters of the run. Without an explicit static Σ_ν the static KF uses the
    initial Σ_emp plus t_s² times the KMP variance averaged over the reference supports.
    """
    settings = config.filter
    mean_variance = float(
        np.mean([np.mean(kmp.predict_many(kmp.reference.inputs)[1]) for kmp in kmps])
    )
    return settings.to_filter_config(
        config.n, t_s, static_sigma_nu=settings.sigma_emp0 + t_s**2 * mean_variance
    )


def estimate(
    config: ExperimentConfig,
    arm: ManipulatorModel,
    evaluation: SampledTrajectory,
    kmps: Sequence[KmpModel],
    gps: Sequence[GpModel],
    filter_settings: FilterConfig,
) -> Tuple[Dict[str, EstimateTrace], Dict[str, ObserverTiming]]:
    """
    Run every configured observer on the same evaluation run. `gmr_gp` is fed by the GP
    regressors, every other observer by the KMP regressors.
    """
    if tuple(config.residual_model.features) != ("dq",):
        raise ConfigurationError(
            "online estimation queries the residual models at q̇ only; "
            f"features {config.residual_model.features} are for offline evaluation"
        )
    managers = {"kmp": ResidualModelManager(kmps), "gp": ResidualModelManager(gps)}
    traces: Dict[str, EstimateTrace] = {}
    timing: Dict[str, ObserverTiming] = {}
    for name in config.observers:
        manager = managers["gp" if name == "gmr_gp" else "kmp"]
        observer = build_observer(name, arm, manager, filter_settings)
        started = perf_counter()
        traces[name] = observer.run(evaluation)
        elapsed = perf_counter() - started
        timing[name] = ObserverTiming(total=elapsed, per_sample=elapsed / len(evaluation))
        logger.info(
            f"{name}: {len(evaluation)} samples in {elapsed:.3f} s "
            f"({1e6 * timing[name].per_sample:.1f} µs/sample)"
        )
    return traces, timing
