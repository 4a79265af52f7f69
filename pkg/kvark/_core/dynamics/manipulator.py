import math
from abc import ABC, abstractmethod
from typing import ClassVar, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from kvark._common._exceptions.kvark_exception import (
    InvalidInputError,
    SingularConfigurationError,
)
from kvark._common.constants import CHAIN_CHRISTOFFEL_STEP, JACOBIAN_RANK_TOL
from kvark._common.linalg import require_finite, symmetrize
from kvark._core._type_spec import FloatArray
from kvark._core.models.manipulator import ArmSpec


class ManipulatorModel(ABC):
    """
    Rigid-body model of a fixed-base serial manipulator.

    The plant obeys M(q)q̈ + C(q,q̇)q̇ + g(q) = τ_m − τ_ext − τ_r. Public methods validate
    their inputs; the underscored variants skip validation and are used by the
    integrator and the filter hot loops.
    """

    task_axes: ClassVar[Tuple[str, ...]] = ()

    def __init__(self, spec: ArmSpec) -> None:
        self._spec = spec
        self._n = spec.n
        self._gravity_accel = spec.gravity_accel
        q_min, q_max, dq_max, ddq_max = spec.limit_arrays()
        self.q_min = q_min
        self.q_max = q_max
        self.dq_max = dq_max
        self.ddq_max = ddq_max

    @property
    def spec(self) -> ArmSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._n

    @property
    def gravity_accel(self) -> float:
        return self._gravity_accel

    @abstractmethod
    def _mass_matrix(self, q: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _coriolis_matrix(self, q: FloatArray, dq: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _gravity_vector(self, q: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _jacobian(self, q: FloatArray) -> FloatArray: ...

    def _bias_torque(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        return self._coriolis_matrix(q, dq) @ dq + self._gravity_vector(q)

    def _coriolis_transpose_velocity(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        return self._coriolis_matrix(q, dq).T @ dq

    def _forward_dynamics(
        self, q: FloatArray, dq: FloatArray, tau: FloatArray
    ) -> FloatArray:
        return np.linalg.solve(self._mass_matrix(q), tau - self._bias_torque(q, dq))

    def _inverse_dynamics(
        self, q: FloatArray, dq: FloatArray, ddq: FloatArray
    ) -> FloatArray:
        return self._mass_matrix(q) @ ddq + self._bias_torque(q, dq)

    def _momentum_input(
        self, q: FloatArray, dq: FloatArray, tau_m: FloatArray
    ) -> FloatArray:
        return self._coriolis_transpose_velocity(q, dq) - self._gravity_vector(q) + tau_m

    def _vector(self, name: str, value: FloatArray) -> FloatArray:
        array = np.asarray(value, dtype=float)
        if array.shape != (self._n,):
            raise InvalidInputError(
                f"{name} must have shape ({self._n},), got {array.shape}"
            )
        require_finite(name, array)
        return array

    def mass_matrix(self, q: FloatArray) -> FloatArray:
        """Symmetric positive-definite inertia matrix M(q)."""
        return self._mass_matrix(self._vector("q", q))

    def coriolis_matrix(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        """Christoffel-form C(q, q̇), so that Ṁ − 2C is skew-symmetric."""
        return self._coriolis_matrix(self._vector("q", q), self._vector("dq", dq))

    def gravity_vector(self, q: FloatArray) -> FloatArray:
        return self._gravity_vector(self._vector("q", q))

    def inverse_dynamics(
        self, q: FloatArray, dq: FloatArray, ddq: FloatArray
    ) -> FloatArray:
        """Nominal torque τ_EL = M(q)q̈ + C(q,q̇)q̇ + g(q)."""
        return self._inverse_dynamics(
            self._vector("q", q), self._vector("dq", dq), self._vector("ddq", ddq)
        )

    def forward_dynamics(
        self, q: FloatArray, dq: FloatArray, tau: FloatArray
    ) -> FloatArray:
        """Joint acceleration q̈ = M⁻¹(τ − Cq̇ − g) for the net joint torque τ."""
        return self._forward_dynamics(
            self._vector("q", q), self._vector("dq", dq), self._vector("tau", tau)
        )

    def generalized_momentum(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        q, dq = self._vector("q", q), self._vector("dq", dq)
        return self._mass_matrix(q) @ dq

    def momentum_input(
        self, q: FloatArray, dq: FloatArray, tau_m: FloatArray
    ) -> FloatArray:
        """Known part of the momentum derivative, u = Cᵀq̇ − g + τ_m."""
        return self._momentum_input(
            self._vector("q", q), self._vector("dq", dq), self._vector("tau_m", tau_m)
        )

    def kinetic_energy(self, q: FloatArray, dq: FloatArray) -> float:
        q, dq = self._vector("q", q), self._vector("dq", dq)
        return 0.5 * float(dq @ self._mass_matrix(q) @ dq)

    def jacobian(self, q: FloatArray) -> FloatArray:
        """Task-space Jacobian at the tool point, rows ordered as `task_axes`."""
        return self._jacobian(self._vector("q", q))

    def cartesian_wrench(self, q: FloatArray, tau: FloatArray) -> FloatArray:
        """
        Map joint torques to the tool wrench by solving Jᵀ(q)F = τ in the least-squares sense.

        Raises:
            SingularConfigurationError: If J(q) is not of full row rank.
        """
        q, tau = self._vector("q", q), self._vector("tau", tau)
        jac = self._jacobian(q)
        singular_values = np.linalg.svd(jac, compute_uv=False)
        rank = int(np.sum(singular_values > JACOBIAN_RANK_TOL * max(1.0, singular_values[0])))
        if rank < jac.shape[0]:
            raise SingularConfigurationError(
                q=np.array2string(q, precision=4), rank=rank, rows=jac.shape[0]
            )
        wrench, *_ = np.linalg.lstsq(jac.T, tau, rcond=None)
        return wrench


class PendulumArm(ManipulatorModel):
    """Single revolute link; q = 0 is horizontal and gravity acts along −y."""

    task_axes = ("m_z",)

    def __init__(self, spec: ArmSpec) -> None:
        super().__init__(spec)
        link = spec.links[0]
        self._inertia = link.mass * link.com**2 + link.inertia
        self._gravity_moment = link.mass * spec.gravity_accel * link.com

    def _mass_matrix(self, q: FloatArray) -> FloatArray:
        return np.array([[self._inertia]])

    def _coriolis_matrix(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        return np.zeros((1, 1))

    def _gravity_vector(self, q: FloatArray) -> FloatArray:
        return np.array([self._gravity_moment * math.cos(q[0])])

    def _jacobian(self, q: FloatArray) -> FloatArray:
        return np.ones((1, 1))

    def _forward_dynamics(
        self, q: FloatArray, dq: FloatArray, tau: FloatArray
    ) -> FloatArray:
        return np.array(
            [(tau[0] - self._gravity_moment * math.cos(q[0])) / self._inertia]
        )


class TwoLinkPlanarArm(ManipulatorModel):
    """
    Closed-form two-link planar arm moving in a vertical plane (gravity along −y).

    Joint angles are relative: q₁ from the horizontal, q₂ from link 1. The task space is
    the tool force (f_x, f_y) in the plane.
    """

    task_axes = ("f_x", "f_y")

    def __init__(self, spec: ArmSpec) -> None:
        super().__init__(spec)
        first, second = spec.links
        g = spec.gravity_accel
        self._l1 = first.length
        self._l2 = second.length
        self._a = (
            first.mass * first.com**2
            + first.inertia
            + second.mass * (first.length**2 + second.com**2)
            + second.inertia
        )
        self._b = second.mass * first.length * second.com
        self._d = second.mass * second.com**2 + second.inertia
        self._g1 = (first.mass * first.com + second.mass * first.length) * g
        self._g2 = second.mass * second.com * g

    def _mass_matrix(self, q: FloatArray) -> FloatArray:
        c2 = math.cos(q[1])
        m11 = self._a + 2.0 * self._b * c2
        m12 = self._d + self._b * c2
        return np.array([[m11, m12], [m12, self._d]])

    def _coriolis_matrix(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        h = -self._b * math.sin(q[1])
        return np.array([[h * dq[1], h * (dq[0] + dq[1])], [-h * dq[0], 0.0]])

    def _gravity_vector(self, q: FloatArray) -> FloatArray:
        c1 = math.cos(q[0])
        c12 = math.cos(q[0] + q[1])
        return np.array([self._g1 * c1 + self._g2 * c12, self._g2 * c12])

    def _jacobian(self, q: FloatArray) -> FloatArray:
        s1, c1 = math.sin(q[0]), math.cos(q[0])
        s12, c12 = math.sin(q[0] + q[1]), math.cos(q[0] + q[1])
        return np.array(
            [
                [-self._l1 * s1 - self._l2 * s12, -self._l2 * s12],
                [self._l1 * c1 + self._l2 * c12, self._l2 * c12],
            ]
        )

    def _forward_dynamics(
        self, q: FloatArray, dq: FloatArray, tau: FloatArray
    ) -> FloatArray:
        # scalar 2x2 solve, this is the integrator's inner call
        q1, q2 = float(q[0]), float(q[1])
        dq1, dq2 = float(dq[0]), float(dq[1])
        c2, s2 = math.cos(q2), math.sin(q2)
        c1, c12 = math.cos(q1), math.cos(q1 + q2)
        m11 = self._a + 2.0 * self._b * c2
        m12 = self._d + self._b * c2
        m22 = self._d
        h = -self._b * s2
        r1 = tau[0] - (h * dq2 * dq1 + h * (dq1 + dq2) * dq2) - (self._g1 * c1 + self._g2 * c12)
        r2 = tau[1] + h * dq1 * dq1 - self._g2 * c12
        det = m11 * m22 - m12 * m12
        return np.array([(m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det])


class SerialChainArm(ManipulatorModel):
    """
    n-link spatial chain evaluated with the recursive Newton-Euler algorithm in the world frame.

    Every link extends along the local x axis of its frame; joint i rotates about
    `links[i].axis` expressed in the frame of link i−1 (the base frame for i = 0). Gravity acts
    along −z and link inertia is isotropic about the center of mass. With two links and
    axes (0, −1, 0) the chain reproduces `TwoLinkPlanarArm` in the x-z plane.
    """

    task_axes = ("f_x", "f_y", "f_z", "m_x", "m_y", "m_z")

    def __init__(self, spec: ArmSpec) -> None:
        super().__init__(spec)
        self._axes = np.array([link.axis for link in spec.links])
        self._masses = np.array([link.mass for link in spec.links])
        self._inertias = np.array([link.inertia for link in spec.links])
        self._lengths = np.array([link.length for link in spec.links])
        self._coms = np.array([link.com for link in spec.links])
        self._zeros = np.zeros(self._n)

    def _kinematics(self, q: FloatArray) -> Tuple[FloatArray, FloatArray, FloatArray]:
        """Return link rotations (n,3,3), joint origins plus tool point (n+1,3) and world joint axes (n,3)."""
        local = Rotation.from_rotvec(self._axes * q[:, None]).as_matrix()
        rotations = np.empty((self._n, 3, 3))
        origins = np.zeros((self._n + 1, 3))
        axes = np.empty((self._n, 3))
        parent = np.eye(3)
        for i in range(self._n):
            axes[i] = parent @ self._axes[i]
            rotations[i] = parent @ local[i]
            origins[i + 1] = origins[i] + rotations[i][:, 0] * self._lengths[i]
            parent = rotations[i]
        return rotations, origins, axes

    def _rnea(
        self, q: FloatArray, dq: FloatArray, ddq: FloatArray, gravity: bool
    ) -> FloatArray:
        rotations, origins, axes = self._kinematics(q)
        omega = np.zeros(3)
        alpha = np.zeros(3)
        accel = np.array([0.0, 0.0, self._gravity_accel if gravity else 0.0])
        forces = np.empty((self._n, 3))
        moments = np.empty((self._n, 3))
        com_offsets = np.empty((self._n, 3))
        for i in range(self._n):
            if i > 0:
                r = origins[i] - origins[i - 1]
                accel = accel + np.cross(alpha, r) + np.cross(omega, np.cross(omega, r))
            spin = axes[i] * dq[i]
            alpha = alpha + axes[i] * ddq[i] + np.cross(omega, spin)
            omega = omega + spin
            rc = rotations[i][:, 0] * self._coms[i]
            com_accel = accel + np.cross(alpha, rc) + np.cross(omega, np.cross(omega, rc))
            com_offsets[i] = rc
            forces[i] = self._masses[i] * com_accel
            moments[i] = self._inertias[i] * alpha
        tau = np.empty(self._n)
        force = np.zeros(3)
        moment = np.zeros(3)
        for i in reversed(range(self._n)):
            moment = (
                moments[i]
                + np.cross(com_offsets[i], forces[i])
                + moment
                + np.cross(origins[i + 1] - origins[i], force)
            )
            force = forces[i] + force
            tau[i] = axes[i] @ moment
        return tau

    def _mass_matrix(self, q: FloatArray) -> FloatArray:
        columns = [
            self._rnea(q, self._zeros, unit, gravity=False) for unit in np.eye(self._n)
        ]
        return symmetrize(np.column_stack(columns))

    def _mass_matrix_derivatives(self, q: FloatArray) -> FloatArray:
        """Central-difference ∂M/∂q_i stacked along the first axis."""
        h = CHAIN_CHRISTOFFEL_STEP
        derivatives = np.empty((self._n, self._n, self._n))
        for i, unit in enumerate(np.eye(self._n)):
            derivatives[i] = (
                self._mass_matrix(q + h * unit) - self._mass_matrix(q - h * unit)
            ) / (2.0 * h)
        return derivatives

    def _coriolis_matrix(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        dm = self._mass_matrix_derivatives(q)
        # c[k, j] = sum_i ½(∂M_kj/∂q_i + ∂M_ki/∂q_j − ∂M_ij/∂q_k) q̇_i
        term_a = np.einsum("ikj,i->kj", dm, dq)
        term_b = np.einsum("jki,i->kj", dm, dq)
        term_c = np.einsum("kij,i->kj", dm, dq)
        return 0.5 * (term_a + term_b - term_c)

    def _bias_torque(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        return self._rnea(q, dq, self._zeros, gravity=True)

    def _gravity_vector(self, q: FloatArray) -> FloatArray:
        return self._rnea(q, self._zeros, self._zeros, gravity=True)

    def _inverse_dynamics(
        self, q: FloatArray, dq: FloatArray, ddq: FloatArray
    ) -> FloatArray:
        return self._rnea(q, dq, ddq, gravity=True)

    def _coriolis_transpose_velocity(self, q: FloatArray, dq: FloatArray) -> FloatArray:
        # Ṁ = C + Cᵀ, so Cᵀq̇ = Ṁq̇ − Cq̇ with Ṁ taken along q̇
        h = CHAIN_CHRISTOFFEL_STEP
        m_dot = (self._mass_matrix(q + h * dq) - self._mass_matrix(q - h * dq)) / (2.0 * h)
        coriolis = self._rnea(q, dq, self._zeros, gravity=False)
        return m_dot @ dq - coriolis

    def _jacobian(self, q: FloatArray) -> FloatArray:
        _, origins, axes = self._kinematics(q)
        tool = origins[-1]
        linear = np.cross(axes, tool - origins[:-1])
        return np.vstack([linear.T, axes.T])


_ARM_CLASSES = {
    "pendulum": PendulumArm,
    "planar2": TwoLinkPlanarArm,
    "chain": SerialChainArm,
}


def build_arm(spec: ArmSpec) -> ManipulatorModel:
    return _ARM_CLASSES[spec.kind](spec)
