from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.stats import chi2

from kvark._common._exceptions.kvark_exception import (
    InnovationCovarianceError,
    InvalidInputError,
)
from kvark._common.linalg import symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.models.observer import (
    FilterConfig,
    FilterState,
    StepDiagnostics,
    VirtualMeasurement,
)
from kvark._core._managers.residual_model_manager import ResidualModelManager


def virtual_measurement(
    x_k: FloatArray,
    x_prev: FloatArray,
    u_prev: FloatArray,
    mu_star: FloatArray,
    t_s: float,
) -> FloatArray:
    """ζ* = x_k − x_{k−1} − t_s u_{k−1} + t_s μ_*, which equals −t_s τ_ext plus noise."""
    return x_k - x_prev - t_s * u_prev + t_s * mu_star


def measurement_covariance(
    sigma_star: FloatArray, sigma_emp: FloatArray, t_s: float
) -> FloatArray:
    return t_s**2 * sigma_star + sigma_emp


def update_empirical_noise(
    sigma_emp: FloatArray,
    innovation: FloatArray,
    rho: float,
    lower: FloatArray,
    upper: FloatArray,
) -> FloatArray:
    """EWMA Σ_emp + ρ(diag(r²) − Σ_emp) with the diagonal clamped to [lower, upper]."""
    if not 0.0 <= rho <= 1.0:
        raise InvalidInputError(f"forgetting factor must lie in [0, 1], got {rho}")
    updated = sigma_emp + rho * (np.diag(innovation**2) - sigma_emp)
    np.fill_diagonal(updated, np.clip(np.diag(updated), lower, upper))
    return updated


def _measurement_update(
    omega_pred: FloatArray,
    p_pred: FloatArray,
    zeta: FloatArray,
    sigma_nu: FloatArray,
    t_s: float,
) -> Tuple[FloatArray, FloatArray, StepDiagnostics]:
    n = omega_pred.shape[0]
    h = -t_s * np.eye(n)
    innovation = zeta - h @ omega_pred
    s = symmetrize(h @ p_pred @ h.T + sigma_nu)
    try:
        factor = cho_factor(s, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise InnovationCovarianceError(
            f"innovation covariance is not positive definite: {e}"
        ) from e
    gain = cho_solve(factor, h @ p_pred.T).T
    omega = omega_pred + gain @ innovation
    p = symmetrize((np.eye(n) - gain @ h) @ p_pred)
    nis = float(innovation @ cho_solve(factor, innovation))
    diagnostics = StepDiagnostics(
        innovation=innovation,
        innovation_covariance=s,
        gain=gain,
        nis=nis,
        sigma_nu=sigma_nu,
    )
    return omega, p, diagnostics


def kf_step(
    state: FilterState, zeta: FloatArray, sigma_nu: FloatArray, config: FilterConfig
) -> Tuple[FilterState, StepDiagnostics]:
    """
    One random-walk Kalman recursion with H = −t_s I: predict with Σ_d, then update with ζ*.

    Raises:
        InnovationCovarianceError: If HP_{k|k−1}Hᵀ + Σ_ν cannot be factorised.
    """
    p_pred = state.P + state.sigma_d
    omega, p, diagnostics = _measurement_update(
        state.omega, p_pred, zeta, sigma_nu, config.t_s
    )
    return state.evolve(omega=omega, P=p, sigma_nu=sigma_nu, k=state.k + 1), diagnostics


def vb_update(
    iw_dof: float,
    iw_scale: FloatArray,
    process_innovation: FloatArray,
    p_post: FloatArray,
) -> Tuple[float, FloatArray, FloatArray]:
    """
    Inverse-Wishart update λ' = λ + 1, Υ' = Υ + eeᵀ + P_{k|k}, Σ_d' = Υ'/(λ' − n − 1).
    """
    n = process_innovation.shape[0]
    if not iw_dof > n + 1:
        raise InvalidInputError(f"IW degrees of freedom must exceed {n + 1}, got {iw_dof}")
    dof = iw_dof + 1.0
    scale = symmetrize(iw_scale + np.outer(process_innovation, process_innovation) + p_post)
    return dof, scale, scale / (dof - n - 1)


def iw_time_update(
    iw_dof: float, iw_scale: FloatArray, forgetting: float, n: int
) -> Tuple[float, FloatArray]:
    """Spread the IW posterior between samples; forgetting = 1 leaves it unchanged."""
    if forgetting == 1.0:
        return iw_dof, iw_scale
    return forgetting * (iw_dof - n - 1) + n + 1, forgetting * iw_scale


def kvark_update(
    state: FilterState, measurement: VirtualMeasurement, config: FilterConfig
) -> Tuple[FilterState, StepDiagnostics]:
    """
    Measurement update of the K-VARK filter for a prepared virtual measurement.

    Σ_emp is adapted from the pre-update innovation after Σ_ν was composed from it. M VB
    iterations alternate the Kalman update with the inverse-Wishart update of Σ_d, each one
    re-predicting P_{k|k−1} = P_{k−1|k−1} + Σ_d with the latest Σ_d. Unless
    `iw_per_iteration` is set, every iteration restarts from the same prior (λ, Υ), so λ
    grows by one per sample.
    """
    n = config.n
    zeta, sigma_nu = measurement.zeta, measurement.covariance
    prior_dof, prior_scale = iw_time_update(
        state.iw_dof, state.iw_scale, config.iw_forgetting, n
    )

    sigma_d = state.sigma_d
    dof, scale = prior_dof, prior_scale
    omega, p, first = state.omega, state.P, None
    for _ in range(config.vb_iterations):
        p_pred = state.P + sigma_d
        omega, p, diagnostics = _measurement_update(
            state.omega, p_pred, zeta, sigma_nu, config.t_s
        )
        if first is None:
            first = diagnostics
        if not config.iw_per_iteration:
            dof, scale = prior_dof, prior_scale
        dof, scale, sigma_d = vb_update(dof, scale, omega - state.omega, p)

    sigma_emp = update_empirical_noise(
        state.sigma_emp, first.innovation, config.rho, config.emp_lower, config.emp_upper
    )
    return (
        state.evolve(
            omega=omega,
            P=p,
            sigma_d=sigma_d,
            sigma_emp=sigma_emp,
            sigma_nu=sigma_nu,
            iw_dof=dof,
            iw_scale=scale,
            k=state.k + 1,
        ),
        first,
    )


def innovation_akf_step(
    state: FilterState, zeta: FloatArray, config: FilterConfig
) -> Tuple[FilterState, StepDiagnostics]:
    """
    Innovation-based adaptive KF: Σ_ν ← (1 − ρ_ν)Σ_ν + ρ_ν(rrᵀ + HP_{k|k−1}Hᵀ) before the
    gain, Σ_d ← (1 − ρ_d)Σ_d + ρ_d K r rᵀKᵀ after the update.
    """
    n = config.n
    h = -config.t_s * np.eye(n)
    p_pred = state.P + state.sigma_d
    innovation = zeta - h @ state.omega
    sigma_nu = symmetrize(
        (1.0 - config.rho_nu) * state.sigma_nu
        + config.rho_nu * (np.outer(innovation, innovation) + h @ p_pred @ h.T)
    )
    omega, p, diagnostics = _measurement_update(
        state.omega, p_pred, zeta, sigma_nu, config.t_s
    )
    correction = diagnostics.gain @ innovation
    sigma_d = symmetrize(
        (1.0 - config.rho_d) * state.sigma_d
        + config.rho_d * np.outer(correction, correction)
    )
    return (
        state.evolve(omega=omega, P=p, sigma_d=sigma_d, sigma_nu=sigma_nu, k=state.k + 1),
        diagnostics,
    )


def static_kf_step(
    state: FilterState, zeta: FloatArray, config: FilterConfig
) -> Tuple[FilterState, StepDiagnostics]:
    """`kf_step` with the fixed Σ_d and Σ_ν of the configuration."""
    fixed = state.evolve(sigma_d=np.array(config.sigma_d_static))
    return kf_step(fixed, zeta, np.array(config.sigma_nu_static), config)


def kvark_step(
    state: FilterState,
    q: FloatArray,
    dq: FloatArray,
    tau_m: FloatArray,
    arm: ManipulatorModel,
    residual_models: ResidualModelManager,
    config: FilterConfig,
) -> Tuple[FloatArray, FilterState, Optional[StepDiagnostics]]:
    """
    One online K-VARK sample: momentum terms, residual-model query at q̇, virtual
    measurement and the VB-adapted Kalman update. The first sample only initialises the
    stored momentum and returns the prior estimate.

    Returns:
        Tuple[FloatArray, FilterState, Optional[StepDiagnostics]]: τ̂_ext, the new state and
        the update diagnostics (None on the first sample).
    """
    x_k = arm.generalized_momentum(q, dq)
    u_k = arm.momentum_input(q, dq, tau_m)
    if state.x_prev is None:
        fresh = state.evolve(x_prev=x_k, u_prev=u_k, k=state.k + 1)
        return fresh.omega, fresh, None
    mu_star, sigma_star = residual_models.query(dq)
    measurement = VirtualMeasurement(
        zeta=virtual_measurement(x_k, state.x_prev, state.u_prev, mu_star, config.t_s),
        covariance=measurement_covariance(sigma_star, state.sigma_emp, config.t_s),
    )
    updated, diagnostics = kvark_update(state, measurement, config)
    updated = updated.evolve(x_prev=x_k, u_prev=u_k)
    return updated.omega, updated, diagnostics


def nis_band(dof: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Central chi-square interval the NIS of a consistent filter falls in."""
    if not 0.0 < confidence < 1.0:
        raise InvalidInputError(f"confidence must lie in (0, 1), got {confidence}")
    tail = 0.5 * (1.0 - confidence)
    return float(chi2.ppf(tail, dof)), float(chi2.ppf(1.0 - tail, dof))


def nis_consistency(nis: FloatArray, dof: int, confidence: float = 0.95) -> float:
    """Fraction of the finite NIS values inside `nis_band`; NaN when there are none."""
    values = np.asarray(nis, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return float("nan")
    lower, upper = nis_band(dof, confidence)
    return float(np.mean((values >= lower) & (values <= upper)))
