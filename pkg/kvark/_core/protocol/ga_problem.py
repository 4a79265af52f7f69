from typing import Protocol

import numpy as np

from kvark._core._type_spec import FloatArray


class GaProblem(Protocol):
    """
    Protocol that specifies what `ga_optimize` needs from a problem: a dimension, an
    objective to minimise, a non-negative constraint violation that is zero exactly on the
    feasible set, and a sampler for initial candidates.
    """

    @property
    def dimension(self) -> int: ...

    def objective(self, x: FloatArray) -> float: ...

    def violation(self, x: FloatArray) -> float: ...

    def sample(self, rng: np.random.Generator) -> FloatArray: ...
