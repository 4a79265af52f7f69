from typing import Tuple

import numpy as np
from scipy.special import logsumexp

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._common.linalg import floor_eigenvalues, require_finite, symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.mixture.em import component_log_densities
from kvark._core.models.mixture import GmmModel, ReferenceTrajectory


def _as_inputs(points: FloatArray) -> FloatArray:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    return points


def conditional_moments(
    gmm: GmmModel, inputs: FloatArray
) -> Tuple[FloatArray, FloatArray]:
    """
    Moment-matched GMR conditional of the output block given the leading input block.

    Args:
        gmm (GmmModel): Mixture over (input, output) vectors, inputs first.
        inputs (FloatArray): Query inputs, shape (N, d) or (N,) for d = 1.

    Returns:
        Tuple[FloatArray, FloatArray]: Means (N, o) and covariances (N, o, o), not floored.
    """
    inputs = _as_inputs(inputs)
    require_finite("gmr", inputs)
    d = inputs.shape[1]
    if not 0 < d < gmm.dim:
        raise InvalidInputError(
            f"input dimension {d} leaves no output block in a {gmm.dim}-D mixture"
        )
    mu_s, mu_o = gmm.means[:, :d], gmm.means[:, d:]
    sigma_ss = gmm.covariances[:, :d, :d]
    sigma_os = gmm.covariances[:, d:, :d]
    sigma_oo = gmm.covariances[:, d:, d:]

    logprobs = component_log_densities(inputs, mu_s, sigma_ss) + np.log(gmm.weights)
    h = np.exp(logprobs - logsumexp(logprobs, axis=1, keepdims=True))  # (N, K)

    # regression gains Σ_os Σ_ss⁻¹ per component, shape (K, o, d)
    gains = np.stack(
        [np.linalg.solve(ss, os.T).T for ss, os in zip(sigma_ss, sigma_os)]
    )
    schur = sigma_oo - np.einsum("kod,kpd->kop", gains, sigma_os)
    cond_means = mu_o[None, :, :] + np.einsum(
        "kod,nkd->nko", gains, inputs[:, None, :] - mu_s[None, :, :]
    )  # (N, K, o)

    means = np.einsum("nk,nko->no", h, cond_means)
    spread = cond_means - means[:, None, :]
    covariances = np.einsum("nk,kop->nop", h, schur) + np.einsum(
        "nk,nko,nkp->nop", h, spread, spread
    )
    return means, covariances


def gmr_condition(gmm: GmmModel, support_points: FloatArray) -> ReferenceTrajectory:
    """
    Extract the probabilistic reference {s, μ̂(s), Σ̂(s)} at the given support points.

    Conditional covariances are symmetrised and their eigenvalues floored at the mixture's
    covariance floor.
    """
    inputs = _as_inputs(support_points)
    means, covariances = conditional_moments(gmm, inputs)
    floor = max(gmm.covariance_floor, np.finfo(float).tiny)
    covariances = np.stack(
        [floor_eigenvalues(symmetrize(c), floor) for c in covariances]
    )
    return ReferenceTrajectory(inputs=inputs, means=means, covariances=covariances)


def support_grid(data: FloatArray, n_points: int) -> FloatArray:
    """`n_points` equally spaced support inputs spanning [min, max] of the observed data."""
    if n_points < 2:
        raise InvalidInputError(f"a support grid needs at least two points, got {n_points}")
    data = np.asarray(data, dtype=float).ravel()
    require_finite("support_grid", data)
    low, high = float(np.min(data)), float(np.max(data))
    if not high > low:
        raise InvalidInputError(
            f"support range is degenerate (min = max = {low}); excite the joint further"
        )
    return np.linspace(low, high, n_points)


def component_supports(gmm: GmmModel, input_dim: int) -> FloatArray:
    """Input blocks of the component means, used as supports when d > 1."""
    return np.array(gmm.means[:, :input_dim])
