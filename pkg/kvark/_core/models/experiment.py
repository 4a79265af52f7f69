from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import Field, ValidationError, field_validator, model_validator

from kvark._common._exceptions.kvark_exception import ConfigurationError
from kvark._common.constants import (
    DEFAULT_FORGETTING,
    DEFAULT_HARMONICS,
    DEFAULT_PERIOD,
    DEFAULT_GRID_POINTS,
    DEFAULT_SUPPORT_POINTS,
    DEFAULT_VB_ITERATIONS,
    EM_MAX_ITERATIONS,
    EM_RELATIVE_TOL,
    EMPIRICAL_NOISE_BOUNDS,
    IW_PRIOR_SCALE,
    TEST_FRACTION,
)
from kvark._core._type_spec import FloatArray, KvarkModel
from kvark._core.dynamics.simulator import TrackingGains
from kvark._core.models.excitation import GaConfig
from kvark._core.models.friction import FrictionProfile
from kvark._core.models.manipulator import ArmSpec
from kvark._core.models.observer import FilterConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ObserverName = Literal["kvark", "gmr_gp", "akf", "static_kf"]
TruthMode = Literal["injected", "difference"]
FeatureName = Literal["q", "dq", "ddq"]

PerJoint = Union[float, List[float]]


class ExcitationSettings(KvarkModel):
    """
    Shape of the excitation trajectories used to collect training data.

    Attributes:
        harmonics (int): Fourier harmonics per joint.
        period (float): Base period in s.
        grid_points (int): Optimisation grid size.
        margin (float): Fraction of each position range kept free for tracking error.
        trajectories (int): Independently optimised trajectories, each simulated once.
        duration (float): Simulated length of every excitation run in s.
    """

    harmonics: int = Field(default=DEFAULT_HARMONICS, ge=1)
    period: float = Field(default=DEFAULT_PERIOD, gt=0.0)
    grid_points: int = Field(default=DEFAULT_GRID_POINTS, ge=2)
    margin: float = Field(default=0.05, ge=0.0, lt=0.5)
    trajectories: int = Field(default=3, ge=1)
    duration: float = Field(default=20.0, gt=0.0)


class ResidualModelSettings(KvarkModel):
    """
    Offline-phase settings. Scalars apply to every joint, lists give one value per joint.

    Attributes:
        components (int): GMM components per joint.
        support_points (int): N, the size of the GMR reference.
        length_scale (PerJoint): KMP and GP kernel l.
        signal_variance (PerJoint): σ_f².
        lambda_mean (PerJoint): λ₁ (also the GP noise scale).
        lambda_variance (PerJoint): λ₂.
        features (Tuple[FeatureName, ...]): Inputs of the residual models.
        test_fraction (float): Held-out share of the residual rows.
        em_max_iterations (int): EM iteration cap.
        em_tol (float): EM relative log-likelihood tolerance.
    """

    components: int = Field(default=5, ge=1)
    support_points: int = Field(default=DEFAULT_SUPPORT_POINTS, ge=2)
    length_scale: PerJoint = 0.1
    signal_variance: PerJoint = 1e2
    lambda_mean: PerJoint = 0.1
    lambda_variance: PerJoint = 1e3
    features: Tuple[FeatureName, ...] = ("dq",)
    test_fraction: float = Field(default=TEST_FRACTION, gt=0.0, lt=1.0)
    em_max_iterations: int = Field(default=EM_MAX_ITERATIONS, ge=1)
    em_tol: float = Field(default=EM_RELATIVE_TOL, gt=0.0)

    def per_joint(self, name: str, n: int) -> FloatArray:
        value = getattr(self, name)
        values = np.full(n, float(value)) if isinstance(value, (int, float)) else np.array(value, dtype=float)
        if values.shape != (n,):
            raise ConfigurationError(
                f"residual_model.{name} needs {n} values, got {values.shape[0]}"
            )
        return values


class FilterSettings(KvarkModel):
    """
    Scalar knobs of the observers; matrices are formed as multiples of the identity.

    Attributes:
        rho (float): EWMA forgetting of Σ_emp.
        vb_iterations (int): VB iterations per sample.
        iw_dof (Optional[float]): Prior IW degrees of freedom, default n + 3.
        iw_prior_variance (float): Prior mean of Σ_d per joint.
        iw_per_iteration (bool): Increment the IW parameters in every VB iteration.
        iw_forgetting (float): IW time-update factor, 1.0 disables it.
        sigma_emp0 (float): Initial Σ_emp diagonal.
        emp_bounds (Tuple[float, float]): Σ_emp clamp.
        p0 (float): Initial P diagonal.
        rho_nu (float): Innovation-AKF forgetting of Σ_ν.
        rho_d (float): Innovation-AKF forgetting of Σ_d.
        static_sigma_nu (Optional[float]): Σ_ν diagonal of the static KF. When unset the
            pipeline uses sigma_emp0 plus t_s² times the mean residual-model variance.
    """

    rho: float = Field(default=DEFAULT_FORGETTING, ge=0.0, lt=1.0)
    vb_iterations: int = Field(default=DEFAULT_VB_ITERATIONS, ge=1)
    iw_dof: Optional[float] = None
    iw_prior_variance: float = Field(default=IW_PRIOR_SCALE, gt=0.0)
    iw_per_iteration: bool = False
    iw_forgetting: float = Field(default=1.0, gt=0.0, le=1.0)
    sigma_emp0: float = Field(default=1e-6, gt=0.0)
    emp_bounds: Tuple[float, float] = EMPIRICAL_NOISE_BOUNDS
    p0: float = Field(default=1.0, ge=0.0)
    rho_nu: float = Field(default=DEFAULT_FORGETTING, ge=0.0, le=1.0)
    rho_d: float = Field(default=DEFAULT_FORGETTING, ge=0.0, le=1.0)
    static_sigma_nu: Optional[float] = Field(default=None, gt=0.0)

    def to_filter_config(
        self, n: int, t_s: float, static_sigma_nu: Optional[float] = None
    ) -> FilterConfig:
        eye = np.eye(n)
        dof = float(n + 3) if self.iw_dof is None else self.iw_dof
        sigma_nu = self.static_sigma_nu if self.static_sigma_nu is not None else static_sigma_nu
        return FilterConfig(
            n=n,
            t_s=t_s,
            rho=self.rho,
            vb_iterations=self.vb_iterations,
            iw_dof=dof,
            iw_scale=self.iw_prior_variance * max(dof - n - 1, 0.0) * eye,
            iw_per_iteration=self.iw_per_iteration,
            iw_forgetting=self.iw_forgetting,
            sigma_emp0=np.full(n, self.sigma_emp0),
            emp_lower=np.full(n, self.emp_bounds[0]),
            emp_upper=np.full(n, self.emp_bounds[1]),
            p0=self.p0 * eye,
            rho_nu=self.rho_nu,
            rho_d=self.rho_d,
            sigma_nu_static=None if sigma_nu is None else sigma_nu * eye,
        )


class DisturbanceStep(KvarkModel):
    """From `t_start` on, joint `joint` (1-based) carries `torque` N·m of external torque."""

    t_start: float = Field(ge=0.0)
    joint: int = Field(ge=1)
    torque: float


class ScenarioSettings(KvarkModel):
    """
    The evaluation run.

    Attributes:
        t_s (float): Sampling period in s.
        duration (float): Evaluation length in s.
        disturbances (List[DisturbanceStep]): Piecewise-constant τ_ext profile.
        truth (TruthMode): `injected` scores against the simulated τ_ext, `difference`
            against τ_loaded − τ_free of a matched free run.
        phase (float): Time offset into the first excitation trajectory used as the
            evaluation reference, in s.
        amplitude_scale (float): Scale of the evaluation reference about the midpoints.
        gains (TrackingGains): Computed-torque tracking gains.
    """

    t_s: float = Field(default=0.004, gt=0.0)
    duration: float = Field(default=20.0, gt=0.0)
    disturbances: List[DisturbanceStep] = Field(
        default_factory=lambda: [
            DisturbanceStep(t_start=5.0, joint=1, torque=5.0),
            DisturbanceStep(t_start=10.0, joint=2, torque=-3.0),
            DisturbanceStep(t_start=15.0, joint=1, torque=0.0),
        ]
    )
    truth: TruthMode = "injected"
    phase: float = Field(default=2.5, ge=0.0)
    amplitude_scale: float = Field(default=0.8, gt=0.0, le=1.0)
    gains: TrackingGains = Field(default_factory=TrackingGains)

    def tau_ext(self, t: float, n: int) -> FloatArray:
        torque = np.zeros(n)
        for step in sorted(self.disturbances, key=lambda s: s.t_start):
            if t >= step.t_start:
                torque[step.joint - 1] = step.torque
        return torque


class ExperimentConfig(KvarkModel):
    """
    A complete experiment: arm, ground-truth friction, offline phase, filter, scenario and
    the observers to compare.

    Attributes:
        arm (ArmSpec): The simulated manipulator.
        friction (FrictionProfile): Ground-truth residual torque.
        excitation (ExcitationSettings): Training trajectory shape.
        ga (GaConfig): Excitation optimiser settings; its seed is derived from `seed`.
        residual_model (ResidualModelSettings): GMM / KMP / GP settings.
        filter (FilterSettings): Observer settings.
        scenario (ScenarioSettings): The evaluation run.
        observers (List[ObserverName]): Observers run on identical data.
        seed (int): Master seed.
        bench_seeds (List[int]): Seeds of the `bench` command.
        output_dir (str): Where artifacts are written.
        trajectory_files (Optional[List[str]]): Training CSVs used instead of simulated
            excitation runs.
    """

    arm: ArmSpec
    friction: FrictionProfile
    excitation: ExcitationSettings = Field(default_factory=ExcitationSettings)
    ga: GaConfig = Field(default_factory=GaConfig)
    residual_model: ResidualModelSettings = Field(default_factory=ResidualModelSettings)
    filter: FilterSettings = Field(default_factory=FilterSettings)
    scenario: ScenarioSettings = Field(default_factory=ScenarioSettings)
    observers: List[ObserverName] = Field(
        default_factory=lambda: ["kvark", "gmr_gp", "akf", "static_kf"]
    )
    seed: int = Field(default=0, ge=0)
    bench_seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    output_dir: str = "kvark_out"
    trajectory_files: Optional[List[str]] = None

    @field_validator("observers")
    @classmethod
    def _distinct_observers(cls, observers: List[str]) -> List[str]:
        if not observers or len(set(observers)) != len(observers):
            raise ValueError("observers must be a non-empty list without duplicates")
        return observers

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        n = self.arm.n
        if self.friction.n != n:
            raise ValueError(f"friction has {self.friction.n} joints, the arm has {n}")
        for step in self.scenario.disturbances:
            if step.joint > n:
                raise ValueError(f"disturbance on joint {step.joint} of a {n}-joint arm")
        for name in ("length_scale", "signal_variance", "lambda_mean", "lambda_variance"):
            value = getattr(self.residual_model, name)
            if isinstance(value, list) and len(value) != n:
                raise ValueError(f"residual_model.{name} needs {n} values, got {len(value)}")
        if self.trajectory_files is not None:
            missing = [f for f in self.trajectory_files if not Path(f).exists()]
            if missing:
                raise ValueError(f"trajectory files not found: {missing}")
        return self

    @property
    def n(self) -> int:
        return self.arm.n

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        for key in ("arm", "friction"):
            if key not in data:
                raise ConfigurationError(f"Config must contain an '{key}' section")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid experiment config: {e}") from e

    @classmethod
    def from_toml(cls, path: Union[str, Path]) -> "ExperimentConfig":
        if isinstance(path, str):
            path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found at {path}")
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid TOML: {e}") from e
        return cls.from_dict(data)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.model_copy(update={"seed": seed})

    def with_output_dir(self, output_dir: Union[str, Path]) -> "ExperimentConfig":
        return self.model_copy(update={"output_dir": str(output_dir)})
