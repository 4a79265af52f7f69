import numpy as np
from scipy.spatial.distance import cdist

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._core._type_spec import FloatArray


def se_kernel(
    s: FloatArray, s_prime: FloatArray, length_scale: float, signal_variance: float
) -> float:
    """σ_f² exp(−½ (s − s')ᵀ l⁻¹ (s − s')) for a scalar l."""
    if not length_scale > 0.0:
        raise InvalidInputError(f"length_scale must be positive, got {length_scale}")
    diff = np.atleast_1d(np.asarray(s, dtype=float) - np.asarray(s_prime, dtype=float))
    return float(signal_variance * np.exp(-0.5 * float(diff @ diff) / length_scale))


def kernel_matrix(
    a: FloatArray, b: FloatArray, length_scale: float, signal_variance: float
) -> FloatArray:
    """Pairwise `se_kernel` between the rows of `a` (M, d) and `b` (N, d)."""
    sq = cdist(np.atleast_2d(a), np.atleast_2d(b), metric="sqeuclidean")
    return signal_variance * np.exp(-0.5 * sq / length_scale)


def as_query(s: FloatArray, input_dim: int) -> FloatArray:
    query = np.atleast_1d(np.asarray(s, dtype=float))
    if query.shape != (input_dim,):
        raise InvalidInputError(
            f"query must have {input_dim} component(s), got shape {query.shape}"
        )
    if not np.all(np.isfinite(query)):
        raise InvalidInputError("query input is not finite")
    return query


def as_queries(inputs: FloatArray, input_dim: int) -> FloatArray:
    queries = np.asarray(inputs, dtype=float)
    if queries.ndim == 1:
        queries = queries[:, None] if input_dim == 1 else queries[None, :]
    if queries.ndim != 2 or queries.shape[1] != input_dim:
        raise InvalidInputError(
            f"queries must have shape (M, {input_dim}), got {np.shape(inputs)}"
        )
    if not np.all(np.isfinite(queries)):
        raise InvalidInputError("query inputs are not finite")
    return queries
