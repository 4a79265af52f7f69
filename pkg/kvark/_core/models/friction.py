import numpy as np
from pydantic import Field, model_validator

from kvark._core._type_spec import Array, FloatArray, KvarkModel


class FrictionProfile(KvarkModel):
    """
    Ground-truth residual torque injected by the simulator: smooth Coulomb + viscous +
    Stribeck friction plus zero-mean noise whose standard deviation grows with |q̇|.

    The deterministic part is odd in q̇ and vanishes at q̇ = 0; stiction is not modelled.

    Attributes:
        coulomb (Array): Coulomb level per joint in N·m.
        viscous (Array): Viscous coefficient per joint in N·m·s/rad.
        stribeck (Array): Stribeck magnitude per joint in N·m.
        stribeck_velocity (Array): Stribeck velocity scale per joint in rad/s.
        smoothing_velocity (float): Velocity scale of the tanh sign approximation in rad/s.
        noise_std_base (Array): Noise standard deviation at rest per joint in N·m.
        noise_std_slope (Array): Noise standard deviation growth per joint in N·m·s/rad.
    """

    coulomb: Array
    viscous: Array
    stribeck: Array
    stribeck_velocity: Array
    smoothing_velocity: float = Field(default=0.05, gt=0.0)
    noise_std_base: Array
    noise_std_slope: Array

    @model_validator(mode="after")
    def _shapes(self) -> "FrictionProfile":
        n = self.coulomb.shape[0]
        for name in (
            "viscous",
            "stribeck",
            "stribeck_velocity",
            "noise_std_base",
            "noise_std_slope",
        ):
            value = getattr(self, name)
            if value.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {value.shape}")
            if np.any(value < 0.0):
                raise ValueError(f"{name} must be non-negative")
        if np.any(self.stribeck_velocity <= 0.0):
            raise ValueError("stribeck_velocity must be positive")
        return self

    @classmethod
    def zero(cls, n: int) -> "FrictionProfile":
        zeros = np.zeros(n)
        return cls(
            coulomb=zeros,
            viscous=zeros,
            stribeck=zeros,
            stribeck_velocity=np.ones(n),
            noise_std_base=zeros,
            noise_std_slope=zeros,
        )

    @property
    def n(self) -> int:
        return int(self.coulomb.shape[0])

    def deterministic(self, dq: FloatArray) -> FloatArray:
        dq = np.asarray(dq, dtype=float)
        smooth_sign = np.tanh(dq / self.smoothing_velocity)
        stribeck = self.stribeck * np.exp(-((dq / self.stribeck_velocity) ** 2))
        return (self.coulomb + stribeck) * smooth_sign + self.viscous * dq

    def noise_std(self, dq: FloatArray) -> FloatArray:
        return self.noise_std_base + self.noise_std_slope * np.abs(dq)

    def sample_noise(self, dq: FloatArray, rng: np.random.Generator) -> FloatArray:
        """One zero-mean draw of the noise term at q̇."""
        dq = np.asarray(dq, dtype=float)
        return self.noise_std(dq) * rng.standard_normal(dq.shape)
