from typing import Tuple

import numpy as np
import scipy.linalg
from loguru import logger
from scipy.special import logsumexp

from kvark._common._exceptions.kvark_exception import InsufficientDataError
from kvark._common.constants import COVARIANCE_FLOOR, EM_MAX_ITERATIONS, EM_RELATIVE_TOL
from kvark._common.linalg import floor_eigenvalues, require_finite, symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.models.mixture import GmmModel

ROWS_PER_COMPONENT = 10
EMPTY_COMPONENT_MASS = 1e-10


def _as_rows(data: FloatArray) -> FloatArray:
    """Vectors are read as one-dimensional samples."""
    data = np.asarray(data, dtype=float)
    return data[:, None] if data.ndim == 1 else data


def component_log_densities(
    data: FloatArray, means: FloatArray, covariances: FloatArray
) -> FloatArray:
    """log N(x_i; μ_k, Σ_k) for every row and component, shape (rows, K)."""
    rows, dim = data.shape
    logprobs = np.full((rows, means.shape[0]), -0.5 * dim * np.log(2.0 * np.pi))
    for k, (mean, cov) in enumerate(zip(means, covariances)):
        chol = scipy.linalg.cholesky(cov, lower=True)
        # -0.5 log|Σ| = -sum(log diag(L))
        logprobs[:, k] -= np.sum(np.log(np.diag(chol)))
        soln = scipy.linalg.solve_triangular(chol, (data - mean).T, lower=True)
        logprobs[:, k] -= 0.5 * np.sum(soln**2, axis=0)
    return logprobs


def weighted_log_densities(gmm: GmmModel, data: FloatArray) -> FloatArray:
    return component_log_densities(data, gmm.means, gmm.covariances) + np.log(
        gmm.weights
    )


def log_likelihood(gmm: GmmModel, data: FloatArray) -> float:
    """Total log-likelihood of `data` under the mixture."""
    data = _as_rows(data)
    return float(np.sum(logsumexp(weighted_log_densities(gmm, data), axis=1)))


def responsibilities(gmm: GmmModel, data: FloatArray) -> FloatArray:
    """Posterior component probabilities, shape (rows, K)."""
    data = _as_rows(data)
    logprobs = weighted_log_densities(gmm, data)
    return np.exp(logprobs - logsumexp(logprobs, axis=1, keepdims=True))


def kmeans_plus_plus(
    data: FloatArray, n_components: int, rng: np.random.Generator
) -> FloatArray:
    """Seed `n_components` centers with D²-weighted sampling."""
    rows = data.shape[0]
    centers = [data[rng.integers(rows)]]
    closest = np.sum((data - centers[0]) ** 2, axis=1)
    for _ in range(1, n_components):
        total = closest.sum()
        if total <= 0.0:
            index = int(rng.integers(rows))
        else:
            index = int(rng.choice(rows, p=closest / total))
        centers.append(data[index])
        closest = np.minimum(closest, np.sum((data - data[index]) ** 2, axis=1))
    return np.array(centers)


def _initial_parameters(
    data: FloatArray, n_components: int, floor: float, rng: np.random.Generator
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    rows, dim = data.shape
    centers = kmeans_plus_plus(data, n_components, rng)
    distances = np.stack([np.sum((data - c) ** 2, axis=1) for c in centers], axis=1)
    labels = np.argmin(distances, axis=1)
    global_cov = np.atleast_2d(np.cov(data, rowvar=False, ddof=0))
    weights = np.empty(n_components)
    covariances = np.empty((n_components, dim, dim))
    for k in range(n_components):
        members = data[labels == k]
        weights[k] = max(members.shape[0], 1) / rows
        if members.shape[0] > dim:
            cov = np.atleast_2d(np.cov(members, rowvar=False, ddof=0))
        else:
            cov = global_cov
        covariances[k] = floor_eigenvalues(symmetrize(cov), floor)
    return weights / weights.sum(), centers.copy(), covariances


def _m_step(
    data: FloatArray, resp: FloatArray, floor: float
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    rows, dim = data.shape
    counts = resp.sum(axis=0)
    weights = counts / rows
    means = (resp.T @ data) / counts[:, None]
    covariances = np.empty((resp.shape[1], dim, dim))
    for k in range(resp.shape[1]):
        centered = data - means[k]
        scatter = (resp[:, k, None] * centered).T @ centered / counts[k]
        covariances[k] = floor_eigenvalues(symmetrize(scatter), floor)
    return weights, means, covariances


def em_fit(
    data: FloatArray,
    n_components: int,
    seed: int,
    max_iterations: int = EM_MAX_ITERATIONS,
    tol: float = EM_RELATIVE_TOL,
    covariance_floor: float = COVARIANCE_FLOOR,
) -> GmmModel:
    """
    Fit a full-covariance Gaussian mixture by expectation-maximisation.

    Initialisation is k-means++ from `seed`. Every M-step covariance has its eigenvalues
    floored at `covariance_floor`, which keeps the log-likelihood sequence monotone. Fitting
    stops when the relative improvement falls below `tol` or after `max_iterations`. A
    component whose responsibility mass vanishes is re-seeded at the worst-explained point.

    Args:
        data (FloatArray): Rows of joint (input, output) vectors, shape (rows, D).
        n_components (int): Number of components K.
        seed (int): Initialisation seed.

    Raises:
        InsufficientDataError: If there are fewer than 10·K rows.

    Returns:
        GmmModel: The fitted mixture with its log-likelihood history.
    """
    data = _as_rows(data)
    require_finite("em_fit", data)
    rows, dim = data.shape
    if n_components < 1 or rows < ROWS_PER_COMPONENT * n_components:
        raise InsufficientDataError(
            f"EM with {n_components} components needs at least "
            f"{ROWS_PER_COMPONENT * max(n_components, 1)} rows, got {rows}"
        )

    rng = np.random.default_rng(seed)
    weights, means, covariances = _initial_parameters(
        data, n_components, covariance_floor, rng
    )
    history = []
    previous = -np.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        logprobs = component_log_densities(data, means, covariances) + np.log(weights)
        per_row = logsumexp(logprobs, axis=1)
        current = float(per_row.sum())
        history.append(current)
        if np.isfinite(previous) and (current - previous) < tol * abs(previous):
            break
        previous = current

        resp = np.exp(logprobs - per_row[:, None])
        empty = resp.sum(axis=0) < EMPTY_COMPONENT_MASS * rows
        for k in np.flatnonzero(empty):
            worst = int(np.argmin(per_row))
            logger.warning(
                f"EM component {k} collapsed at iteration {iterations}; re-seeding it at row {worst}"
            )
            resp[:, k] = 0.0
            resp[worst, :] = 0.0
            resp[worst, k] = 1.0
            per_row[worst] = np.inf
        weights, means, covariances = _m_step(data, resp, covariance_floor)
        logger.debug(f"EM iteration {iterations}: log-likelihood {current:.10g}")
    else:
        logprobs = component_log_densities(data, means, covariances) + np.log(weights)
        history.append(float(logsumexp(logprobs, axis=1).sum()))

    logger.debug(
        f"EM finished after {iterations} iterations (K={n_components}, log-likelihood {history[-1]:.10g})"
    )
    return GmmModel(
        weights=weights,
        means=means,
        covariances=covariances,
        covariance_floor=covariance_floor,
        seed=seed,
        iterations=iterations,
        log_likelihood=history[-1],
        history=np.array(history),
    )
