from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from kvark._common.constants import (
    DEFAULT_FORGETTING,
    DEFAULT_VB_ITERATIONS,
    EMPIRICAL_NOISE_BOUNDS,
    IW_PRIOR_SCALE,
)
from kvark._core._type_spec import Array, FloatArray, KvarkModel


class FilterConfig(KvarkModel):
    """
    Parameters shared by the K-VARK filter and the baseline observers.

    Attributes:
        n (int): Number of joints (state dimension).
        t_s (float): Sampling period in s.
        rho (float): EWMA forgetting factor of the empirical measurement noise.
        vb_iterations (int): VB iterations M per sample.
        iw_dof (Optional[float]): Prior inverse-Wishart degrees of freedom λ₀, default n + 3.
        iw_scale (Optional[Array]): Prior scale Υ₀, default 1e-4·(λ₀ − n − 1)·I.
        iw_per_iteration (bool): Increment λ and accumulate Υ in every VB iteration instead of
            once per sample.
        iw_forgetting (float): Time-update factor of (λ, Υ); 1.0 keeps the plain recursion.
        sigma_emp0 (Array): Initial diagonal of Σ_emp.
        emp_lower (Array): Lower clamp of the Σ_emp diagonal.
        emp_upper (Array): Upper clamp of the Σ_emp diagonal.
        p0 (Optional[Array]): Initial estimate covariance, default I.
        omega0 (Optional[Array]): Initial estimate, default 0.
        rho_nu (float): Innovation-AKF forgetting of Σ_ν.
        rho_d (float): Innovation-AKF forgetting of Σ_d.
        sigma_d_static (Optional[Array]): Process covariance of the static KF, default the IW
            prior mean.
        sigma_nu_static (Optional[Array]): Measurement covariance of the static KF and the
            initial Σ_ν of the innovation AKF, default diag(sigma_emp0).
    """

    n: int = Field(ge=1)
    t_s: float = Field(gt=0.0)
    rho: float = Field(default=DEFAULT_FORGETTING, ge=0.0, lt=1.0)
    vb_iterations: int = Field(default=DEFAULT_VB_ITERATIONS, ge=1)
    iw_dof: Optional[float] = None
    iw_scale: Optional[Array] = None
    iw_per_iteration: bool = False
    iw_forgetting: float = Field(default=1.0, gt=0.0, le=1.0)
    sigma_emp0: Optional[Array] = None
    emp_lower: Optional[Array] = None
    emp_upper: Optional[Array] = None
    p0: Optional[Array] = None
    omega0: Optional[Array] = None
    rho_nu: float = Field(default=DEFAULT_FORGETTING, ge=0.0, le=1.0)
    rho_d: float = Field(default=DEFAULT_FORGETTING, ge=0.0, le=1.0)
    sigma_d_static: Optional[Array] = None
    sigma_nu_static: Optional[Array] = None

    @model_validator(mode="after")
    def _defaults_and_bounds(self) -> "FilterConfig":
        n = self.n
        eye = np.eye(n)
        # frozen model: defaults are resolved through object.__setattr__
        if self.iw_dof is None:
            object.__setattr__(self, "iw_dof", float(n + 3))
        if self.iw_dof <= n + 1:
            raise ValueError(f"iw_dof must exceed n + 1 = {n + 1}, got {self.iw_dof}")
        defaults = {
            "iw_scale": IW_PRIOR_SCALE * (self.iw_dof - n - 1) * eye,
            "sigma_emp0": np.full(n, 1e-6),
            "emp_lower": np.full(n, EMPIRICAL_NOISE_BOUNDS[0]),
            "emp_upper": np.full(n, EMPIRICAL_NOISE_BOUNDS[1]),
            "p0": eye,
            "omega0": np.zeros(n),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                value = np.array(value, dtype=float)
                value.flags.writeable = False
                object.__setattr__(self, name, value)
        if self.sigma_d_static is None:
            value = self.iw_scale / (self.iw_dof - n - 1)
            value.flags.writeable = False
            object.__setattr__(self, "sigma_d_static", value)
        if self.sigma_nu_static is None:
            value = np.diag(self.sigma_emp0)
            value.flags.writeable = False
            object.__setattr__(self, "sigma_nu_static", value)

        for name in ("iw_scale", "p0", "sigma_d_static", "sigma_nu_static"):
            _check_psd(name, getattr(self, name), n, strict=name in ("iw_scale", "sigma_nu_static"))
        for name in ("sigma_emp0", "emp_lower", "emp_upper", "omega0"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if np.any(self.emp_lower <= 0.0) or np.any(self.emp_upper < self.emp_lower):
            raise ValueError("Σ_emp bounds must satisfy 0 < lower <= upper")
        if np.any(self.sigma_emp0 <= 0.0):
            raise ValueError("sigma_emp0 must be positive")
        return self

    @property
    def iw_prior_mean(self) -> FloatArray:
        return self.iw_scale / (self.iw_dof - self.n - 1)


def _check_psd(name: str, value: FloatArray, n: int, strict: bool) -> None:
    if value.shape != (n, n):
        raise ValueError(f"{name} must have shape ({n}, {n}), got {value.shape}")
    if not np.allclose(value, value.T):
        raise ValueError(f"{name} must be symmetric")
    smallest = float(np.min(np.linalg.eigvalsh(value)))
    if smallest < 0.0 or (strict and smallest == 0.0):
        raise ValueError(f"{name} must be positive {'definite' if strict else 'semi-definite'}")


@dataclass(frozen=True)
class FilterState:
    """
    Everything a filter carries from one sample to the next.

    Attributes:
        omega (FloatArray): External-torque estimate ω̂ in N·m.
        P (FloatArray): Estimate covariance.
        sigma_d (FloatArray): Process covariance Σ_d.
        sigma_emp (FloatArray): Empirical measurement covariance Σ_emp (diagonal).
        sigma_nu (FloatArray): Measurement covariance used in the last update.
        iw_dof (float): Inverse-Wishart degrees of freedom λ.
        iw_scale (FloatArray): Inverse-Wishart scale Υ.
        x_prev (Optional[FloatArray]): Momentum at the previous sample.
        u_prev (Optional[FloatArray]): Momentum input at the previous sample.
        k (int): Number of samples consumed.
    """

    omega: FloatArray
    P: FloatArray
    sigma_d: FloatArray
    sigma_emp: FloatArray
    sigma_nu: FloatArray
    iw_dof: float
    iw_scale: FloatArray
    x_prev: Optional[FloatArray] = None
    u_prev: Optional[FloatArray] = None
    k: int = 0

    @classmethod
    def initial(cls, config: FilterConfig) -> "FilterState":
        return cls(
            omega=np.array(config.omega0),
            P=np.array(config.p0),
            sigma_d=np.array(config.iw_prior_mean),
            sigma_emp=np.diag(config.sigma_emp0),
            sigma_nu=np.array(config.sigma_nu_static),
            iw_dof=float(config.iw_dof),
            iw_scale=np.array(config.iw_scale),
        )

    def evolve(self, **changes) -> "FilterState":
        return replace(self, **changes)


@dataclass(frozen=True)
class VirtualMeasurement:
    """ζ* (momentum units) and its covariance Σ_ν."""

    zeta: FloatArray
    covariance: FloatArray


@dataclass(frozen=True)
class StepDiagnostics:
    """
    Per-sample quantities of a measurement update, taken from the first VB iteration.

    Attributes:
        innovation (FloatArray): r_k = ζ* − Hω̂_{k|k−1}.
        innovation_covariance (FloatArray): S_k = HP_{k|k−1}Hᵀ + Σ_ν.
        gain (FloatArray): Kalman gain K_k.
        nis (float): rᵀS⁻¹r.
        sigma_nu (FloatArray): Σ_ν used in the update.
    """

    innovation: FloatArray
    innovation_covariance: FloatArray
    gain: FloatArray
    nis: float
    sigma_nu: FloatArray


class EstimateTrace(KvarkModel):
    """
    Per-sample output of an observer run.

    Attributes:
        observer (str): Observer name.
        t (Array): Timestamps, shape (T,).
        tau_hat (Array): Estimated external torques, shape (T, n).
        p_diag (Array): Diagonal of P, shape (T, n).
        sigma_d_diag (Array): Diagonal of Σ_d, shape (T, n).
        sigma_nu_diag (Array): Diagonal of Σ_ν, shape (T, n).
        nis (Array): Normalised innovation squared, NaN where no update happened, shape (T,).
    """

    observer: str
    t: Array
    tau_hat: Array
    p_diag: Array
    sigma_d_diag: Array
    sigma_nu_diag: Array
    nis: Array

    @property
    def n(self) -> int:
        return int(self.tau_hat.shape[1])
