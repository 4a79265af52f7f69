from typing import Tuple

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, cho_factor

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._common.constants import CHOLESKY_JITTER
from kvark._core._type_spec import FloatArray

CholeskyFactor = Tuple[FloatArray, bool]


def symmetrize(matrix: FloatArray) -> FloatArray:
    return 0.5 * (matrix + matrix.T)


def clamp_psd(matrix: FloatArray, floor: float = 0.0) -> FloatArray:
    """Symmetrise and lift every eigenvalue below `floor` up to it."""
    sym = symmetrize(matrix)
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals.min() >= floor:
        return sym
    clipped = np.maximum(eigvals, floor)
    return symmetrize((eigvecs * clipped) @ eigvecs.T)


def floor_eigenvalues(matrix: FloatArray, floor: float) -> FloatArray:
    """Like clamp_psd but leaves the matrix untouched when it already satisfies the floor."""
    eigvals, eigvecs = np.linalg.eigh(matrix)
    if eigvals.min() >= floor:
        return matrix
    clipped = np.maximum(eigvals, floor)
    return symmetrize((eigvecs * clipped) @ eigvecs.T)


def cholesky_with_jitter(matrix: FloatArray, what: str) -> CholeskyFactor:
    """
    Factorise a symmetric matrix, retrying once with a diagonal jitter.

    Raises:
        LinAlgError: If the jittered matrix is still not positive definite.
    """
    try:
        return cho_factor(matrix, lower=True, check_finite=False)
    except LinAlgError:
        logger.debug(f"Cholesky of {what} failed, retrying with jitter {CHOLESKY_JITTER}")
    jittered = matrix + CHOLESKY_JITTER * np.eye(matrix.shape[0])
    return cho_factor(jittered, lower=True, check_finite=False)


def require_finite(name: str, *arrays: FloatArray) -> None:
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise InvalidInputError(f"{name} received non-finite input")
