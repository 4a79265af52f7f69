from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from kvark._core._type_spec import Array, KvarkModel

SPACING_RTOL = 1e-9


class SampledTrajectory(KvarkModel):
    """
    A uniformly sampled joint-space recording: the unit of dataset I/O.

    Attributes:
        t_s (float): Sampling period in s.
        t (Array): Timestamps, shape (T,).
        q (Array): Joint positions in rad, shape (T, n).
        dq (Array): Joint velocities in rad/s, shape (T, n).
        ddq (Array): Joint accelerations in rad/s², shape (T, n).
        tau_m (Array): Motor torques in N·m, shape (T, n).
        tau_ext (Optional[Array]): Injected external torques in N·m, shape (T, n), if known.
    """

    t_s: float = Field(gt=0.0)
    t: Array
    q: Array
    dq: Array
    ddq: Array
    tau_m: Array
    tau_ext: Optional[Array] = None

    @model_validator(mode="after")
    def _well_formed(self) -> "SampledTrajectory":
        rows = self.t.shape[0]
        if self.t.ndim != 1 or rows < 2:
            raise ValueError("a trajectory needs at least two timestamps")
        n = self.q.shape[1] if self.q.ndim == 2 else -1
        blocks = {"q": self.q, "dq": self.dq, "ddq": self.ddq, "tau_m": self.tau_m}
        if self.tau_ext is not None:
            blocks["tau_ext"] = self.tau_ext
        for name, block in blocks.items():
            if block.shape != (rows, n):
                raise ValueError(f"{name} must have shape ({rows}, {n}), got {block.shape}")
            if not np.all(np.isfinite(block)):
                raise ValueError(f"{name} contains non-finite values")
        steps = np.diff(self.t)
        if np.any(steps <= 0.0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.allclose(steps, self.t_s, rtol=SPACING_RTOL, atol=SPACING_RTOL * self.t_s * rows):
            raise ValueError(f"timestamps are not uniformly spaced at t_s={self.t_s}")
        return self

    @property
    def n(self) -> int:
        return int(self.q.shape[1])

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def with_tau_ext(self, tau_ext: Optional[Array]) -> "SampledTrajectory":
        return SampledTrajectory(**{**dict(self), "tau_ext": tau_ext})

    def subset(self, rows: np.ndarray) -> "SampledTrajectory":
        """Return the given contiguous row range (keeps uniform sampling)."""
        rows = np.asarray(rows)
        return SampledTrajectory(
            t_s=self.t_s,
            t=self.t[rows],
            q=self.q[rows],
            dq=self.dq[rows],
            ddq=self.ddq[rows],
            tau_m=self.tau_m[rows],
            tau_ext=None if self.tau_ext is None else self.tau_ext[rows],
        )
