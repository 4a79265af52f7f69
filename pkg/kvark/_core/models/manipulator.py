from typing import Literal, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from kvark._core._type_spec import Array, KvarkModel

ArmKind = Literal["pendulum", "planar2", "chain"]


class LinkParameters(KvarkModel):
    """
    Inertial and geometric parameters of one rigid link.

    Attributes:
        mass (float): Link mass in kg.
        length (float): Distance from this joint to the next one (or the tool point) in m.
        com (float): Distance from this joint to the link's center of mass along the link in m.
        inertia (float): Rotational inertia about the center of mass in kg·m².
        axis (Tuple[float, float, float]): Joint axis in the parent link frame; only used by spatial chains.
    """

    mass: float = Field(gt=0.0)
    length: float = Field(gt=0.0)
    com: float = Field(ge=0.0)
    inertia: float = Field(default=0.0, ge=0.0)
    axis: Tuple[float, float, float] = (0.0, -1.0, 0.0)

    @field_validator("axis")
    @classmethod
    def _unit_axis(cls, axis: Tuple[float, float, float]) -> Tuple[float, float, float]:
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise ValueError("joint axis must be non-zero")
        return (axis[0] / norm, axis[1] / norm, axis[2] / norm)


class JointLimits(KvarkModel):
    """
    Box limits of one joint.

    Attributes:
        q_min (float): Lower position limit in rad.
        q_max (float): Upper position limit in rad.
        dq_max (float): Velocity limit (symmetric) in rad/s.
        ddq_max (float): Acceleration limit (symmetric) in rad/s².
    """

    q_min: float
    q_max: float
    dq_max: float = Field(gt=0.0)
    ddq_max: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "JointLimits":
        if not self.q_min < self.q_max:
            raise ValueError(f"q_min ({self.q_min}) must be below q_max ({self.q_max})")
        return self

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.q_min + self.q_max)

    @property
    def half_range(self) -> float:
        return 0.5 * (self.q_max - self.q_min)


class ArmSpec(KvarkModel):
    """
    Serialisable description of a manipulator, turned into a `ManipulatorModel` by `build_arm`.

    Attributes:
        kind (ArmKind): `pendulum` (1 link), `planar2` (closed-form 2-link planar arm) or
            `chain` (n-link spatial chain evaluated with recursive Newton-Euler).
        links (Tuple[LinkParameters, ...]): One entry per joint.
        limits (Tuple[JointLimits, ...]): One entry per joint.
        gravity_accel (float): Gravitational acceleration in m/s².
    """

    kind: ArmKind
    links: Tuple[LinkParameters, ...]
    limits: Tuple[JointLimits, ...]
    gravity_accel: float = Field(default=9.81, ge=0.0)

    @model_validator(mode="after")
    def _consistent(self) -> "ArmSpec":
        n = len(self.links)
        if n == 0:
            raise ValueError("an arm needs at least one link")
        if len(self.limits) != n:
            raise ValueError(f"expected {n} joint limits, got {len(self.limits)}")
        expected = {"pendulum": 1, "planar2": 2}.get(self.kind)
        if expected is not None and n != expected:
            raise ValueError(f"a {self.kind} arm has {expected} link(s), got {n}")
        return self

    @property
    def n(self) -> int:
        return len(self.links)

    def limit_arrays(self) -> Tuple[Array, Array, Array, Array]:
        """Return (q_min, q_max, dq_max, ddq_max) as joint-indexed arrays."""
        return (
            np.array([lim.q_min for lim in self.limits]),
            np.array([lim.q_max for lim in self.limits]),
            np.array([lim.dq_max for lim in self.limits]),
            np.array([lim.ddq_max for lim in self.limits]),
        )
