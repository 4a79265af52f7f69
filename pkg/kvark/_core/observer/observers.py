from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Optional, Tuple, Type

import numpy as np
from loguru import logger

from kvark._common._exceptions.kvark_exception import (
    ConfigurationError,
    InvalidInputError,
)
from kvark._core._managers.residual_model_manager import ResidualModelManager
from kvark._core._type_spec import FloatArray
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.models.observer import (
    FilterConfig,
    FilterState,
    StepDiagnostics,
    VirtualMeasurement,
)
from kvark._core.observer.mixin.momentum import MomentumMixin
from kvark._core.observer.mixin.trace import TraceMixin
from kvark._core.observer.recursion import (
    innovation_akf_step,
    kvark_update,
    measurement_covariance,
    static_kf_step,
)
from kvark._core.regression.gp import GpModel


class Observer(MomentumMixin, TraceMixin, ABC):
    """
    Sensorless external-torque observer on the discrete momentum balance.

    Every observer builds the same residual-compensated virtual measurement and differs
    only in how it adapts the process and measurement covariances.

    Attributes:
        name (str): Identifier used in traces and reports.
    """

    name: ClassVar[str]

    def __init__(
        self,
        arm: ManipulatorModel,
        residual_models: ResidualModelManager,
        config: FilterConfig,
    ) -> None:
        if arm.n != config.n or residual_models.n != config.n:
            raise InvalidInputError(
                f"arm ({arm.n} joints), residual models ({residual_models.n}) and filter "
                f"config (n={config.n}) disagree"
            )
        self._arm = arm
        self._residual_models = residual_models
        self._config = config
        self._state = FilterState.initial(config)

    def _get_arm(self) -> ManipulatorModel:
        return self._arm

    def _get_config(self) -> FilterConfig:
        return self._config

    def _get_residual_models(self) -> ResidualModelManager:
        return self._residual_models

    def _get_state(self) -> FilterState:
        return self._state

    def _residual_terms(self, dq: FloatArray) -> Tuple[FloatArray, FloatArray]:
        return self._residual_models.query(dq)

    @property
    def state(self) -> FilterState:
        return self._state

    def reset(self) -> None:
        self._state = FilterState.initial(self._config)

    def step(
        self, q: FloatArray, dq: FloatArray, tau_m: FloatArray
    ) -> Tuple[FloatArray, Optional[StepDiagnostics]]:
        """
        Consume one measured sample and return the current external-torque estimate.

        The first sample after `reset` only stores the momentum terms.

        Returns:
            Tuple[FloatArray, Optional[StepDiagnostics]]: τ̂_ext and the update diagnostics,
            None when no update happened.
        """
        x_k, u_k = self._momentum_terms(q, dq, tau_m)
        prepared = self._compensated_measurement(x_k, dq)
        if prepared is None:
            self._state = self._state.evolve(x_prev=x_k, u_prev=u_k, k=self._state.k + 1)
            return self._state.omega, None
        zeta, sigma_star = prepared
        state, diagnostics = self._update(self._state, zeta, sigma_star)
        self._state = state.evolve(x_prev=x_k, u_prev=u_k)
        return self._state.omega, diagnostics

    @abstractmethod
    def _update(
        self, state: FilterState, zeta: FloatArray, sigma_star: FloatArray
    ) -> Tuple[FilterState, StepDiagnostics]: ...


class KvarkObserver(Observer):
    """
    The K-VARK filter: Σ_ν composed of the residual-model covariance and an EWMA empirical
    term, Σ_d adapted by variational-Bayes inverse-Wishart updates.
    """

    name = "kvark"

    def _update(
        self, state: FilterState, zeta: FloatArray, sigma_star: FloatArray
    ) -> Tuple[FilterState, StepDiagnostics]:
        measurement = VirtualMeasurement(
            zeta=zeta,
            covariance=measurement_covariance(sigma_star, state.sigma_emp, self._config.t_s),
        )
        return kvark_update(state, measurement, self._config)


class GmrGpObserver(KvarkObserver):
    """The K-VARK filter fed by per-joint GP regressors instead of KMP."""

    name = "gmr_gp"

    def __init__(
        self,
        arm: ManipulatorModel,
        residual_models: ResidualModelManager,
        config: FilterConfig,
    ) -> None:
        if not all(isinstance(m, GpModel) for m in residual_models.models):
            raise InvalidInputError("the GMR-GP observer requires GP residual models")
        super().__init__(arm, residual_models, config)


class StaticCompensationObserver(Observer):
    """
    Base of the baselines that compensate a constant per-joint residual mean, the support
    average of each residual model, and ignore the model variance.
    """

    def __init__(
        self,
        arm: ManipulatorModel,
        residual_models: ResidualModelManager,
        config: FilterConfig,
    ) -> None:
        super().__init__(arm, residual_models, config)
        self._static_mean = residual_models.static_mean()
        self._zero_covariance = np.zeros((config.n, config.n))
        logger.debug(f"{self.name}: static residual compensation {self._static_mean}")

    @property
    def static_mean(self) -> FloatArray:
        return self._static_mean

    def _residual_terms(self, dq: FloatArray) -> Tuple[FloatArray, FloatArray]:
        return self._static_mean, self._zero_covariance


class InnovationAkfObserver(StaticCompensationObserver):
    """Innovation-based adaptive KF."""

    name = "akf"

    def _update(
        self, state: FilterState, zeta: FloatArray, sigma_star: FloatArray
    ) -> Tuple[FilterState, StepDiagnostics]:
        return innovation_akf_step(state, zeta, self._config)


class StaticKfObserver(StaticCompensationObserver):
    """Kalman filter with the fixed Σ_d and Σ_ν of the configuration."""

    name = "static_kf"

    def _update(
        self, state: FilterState, zeta: FloatArray, sigma_star: FloatArray
    ) -> Tuple[FilterState, StepDiagnostics]:
        return static_kf_step(state, zeta, self._config)


OBSERVERS: Dict[str, Type[Observer]] = {
    cls.name: cls
    for cls in (KvarkObserver, GmrGpObserver, InnovationAkfObserver, StaticKfObserver)
}


def build_observer(
    name: str,
    arm: ManipulatorModel,
    residual_models: ResidualModelManager,
    config: FilterConfig,
) -> Observer:
    try:
        cls = OBSERVERS[name]
    except KeyError as e:
        raise ConfigurationError(
            f"unknown observer '{name}', expected one of {sorted(OBSERVERS)}"
        ) from e
    logger.debug(f"Building observer {name} for {config.n} joints at t_s={config.t_s}")
    return cls(arm, residual_models, config)
