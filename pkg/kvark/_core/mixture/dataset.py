from typing import Sequence, Tuple

import numpy as np

from kvark._common._exceptions.kvark_exception import InvalidInputError
from kvark._common.constants import TEST_FRACTION
from kvark._core._type_spec import FloatArray
from kvark._core.dynamics.manipulator import ManipulatorModel
from kvark._core.dynamics.residual import residual_torques
from kvark._core.models.trajectory import SampledTrajectory

FEATURES = ("q", "dq", "ddq")


def residual_dataset(
    trajectories: Sequence[SampledTrajectory],
    model: ManipulatorModel,
    joint: int,
    features: Sequence[str] = ("dq",),
) -> FloatArray:
    """
    Rows (features..., τ_r) of one joint, stacked over all trajectories.

    The shipped pipeline conditions on the joint velocity alone; `q` and `ddq` of the same
    joint can be added for ablation runs.
    """
    if not trajectories:
        raise InvalidInputError("residual_dataset needs at least one trajectory")
    unknown = [f for f in features if f not in FEATURES]
    if unknown or not features:
        raise InvalidInputError(f"features must be a non-empty subset of {FEATURES}, got {list(features)}")
    if not 0 <= joint < model.n:
        raise InvalidInputError(f"joint index {joint} out of range for a {model.n}-joint arm")
    blocks = []
    for trajectory in trajectories:
        residual = residual_torques(model, trajectory)[:, joint]
        columns = [getattr(trajectory, name)[:, joint] for name in features]
        blocks.append(np.column_stack(columns + [residual]))
    return np.vstack(blocks)


def train_test_split(
    n_rows: int, test_fraction: float = TEST_FRACTION, seed: int = 0
) -> Tuple[FloatArray, FloatArray]:
    """Seeded shuffle of row indices into sorted (train, test) index arrays."""
    if not 0.0 < test_fraction < 1.0:
        raise InvalidInputError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if n_rows < 2:
        raise InvalidInputError("cannot split fewer than two rows")
    n_test = min(max(int(round(test_fraction * n_rows)), 1), n_rows - 1)
    order = np.random.default_rng(seed).permutation(n_rows)
    return np.sort(order[n_test:]), np.sort(order[:n_test])
