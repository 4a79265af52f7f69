import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kvark._common._exceptions.kvark_exception import (
    InvalidInputError,
    JointLimitViolationError,
    SingularConfigurationError,
)
from kvark._core.dynamics.residual import differentiated_acceleration, residual_torques
from kvark._core.dynamics.simulator import rollout, simulate
from kvark._core.models.friction import FrictionProfile
from kvark._core.models.trajectory import SampledTrajectory

G = 9.81
angles = st.floats(-3.0, 3.0, allow_nan=False)
rates = st.floats(-3.0, 3.0, allow_nan=False)
units = st.floats(-1.0, 1.0, allow_nan=False)


def hold(q):
    q = np.asarray(q, dtype=float)

    def reference(t):
        return q, np.zeros_like(q), np.zeros_like(q)

    return reference


def mass_matrix_rate(arm, q, dq, step=1e-5):
    return (arm.mass_matrix(q + step * dq) - arm.mass_matrix(q - step * dq)) / (2.0 * step)


def planar_potential(q, links):
    first, second = links
    return G * (
        first.mass * first.com * math.sin(q[0])
        + second.mass * (first.length * math.sin(q[0]) + second.com * math.sin(q[0] + q[1]))
    )


def test_pendulum_closed_forms(pendulum):
    for q in (-1.0, 0.0, 0.7):
        np.testing.assert_allclose(pendulum.mass_matrix([q]), [[1.0]], atol=1e-12)
        np.testing.assert_array_equal(pendulum.coriolis_matrix([q], [2.0]), [[0.0]])
    np.testing.assert_allclose(pendulum.gravity_vector([0.0]), [G], atol=1e-12)
    np.testing.assert_allclose(
        pendulum.inverse_dynamics([math.pi / 2], [0.0], [2.0]), [2.0], atol=1e-8
    )
    np.testing.assert_allclose(pendulum.generalized_momentum([0.3], [3.0]), [3.0])
    np.testing.assert_allclose(pendulum.momentum_input([0.0], [0.0], [0.0]), [-G])


def test_planar_mass_matrix_off_diagonal(planar, planar_links):
    first, second = planar_links
    mass = planar.mass_matrix([0.2, math.pi / 2])
    expected = (
        second.mass * first.length * second.com * math.cos(math.pi / 2)
        + second.mass * second.com**2
        + second.inertia
    )
    assert mass[0, 1] == pytest.approx(expected, abs=1e-12)
    assert mass[1, 0] == mass[0, 1]


@given(angles, angles, rates, rates, units, units)
def test_planar_inverse_dynamics_matches_lagrangian(planar, planar_links, q1, q2, dq1, dq2, a1, a2):
    first, second = planar_links
    m1, m2, l1, c1, c2 = first.mass, second.mass, first.length, first.com, second.com
    i1, i2 = first.inertia, second.inertia
    cos2, sin2 = math.cos(q2), math.sin(q2)
    m11 = m1 * c1**2 + i1 + m2 * (l1**2 + c2**2 + 2 * l1 * c2 * cos2) + i2
    m12 = m2 * (c2**2 + l1 * c2 * cos2) + i2
    m22 = m2 * c2**2 + i2
    h = m2 * l1 * c2 * sin2
    g1 = (m1 * c1 + m2 * l1) * G * math.cos(q1) + m2 * c2 * G * math.cos(q1 + q2)
    g2 = m2 * c2 * G * math.cos(q1 + q2)
    ddq1, ddq2 = 10 * a1, 10 * a2
    expected = [
        m11 * ddq1 + m12 * ddq2 - h * (2 * dq1 * dq2 + dq2**2) + g1,
        m12 * ddq1 + m22 * ddq2 + h * dq1**2 + g2,
    ]
    np.testing.assert_allclose(
        planar.inverse_dynamics([q1, q2], [dq1, dq2], [ddq1, ddq2]), expected, atol=1e-8
    )


@given(angles, angles, rates, rates, units, units)
def test_planar_skew_symmetry(planar, q1, q2, dq1, dq2, z1, z2):
    q, dq, z = np.array([q1, q2]), np.array([dq1, dq2]), np.array([z1, z2])
    residual = mass_matrix_rate(planar, q, dq) - 2.0 * planar.coriolis_matrix(q, dq)
    assert abs(z @ residual @ z) < 1e-6


@given(angles, angles, rates, rates)
def test_planar_mass_matrix_is_positive_definite(planar, q1, q2, dq1, dq2):
    mass = planar.mass_matrix([q1, q2])
    np.testing.assert_allclose(mass, mass.T)
    assert np.min(np.linalg.eigvalsh(mass)) > 0.0
    assert planar.kinetic_energy([q1, q2], [dq1, dq2]) >= 0.0


def test_chain_reproduces_planar_arm(planar, planar_chain):
    rng = np.random.default_rng(7)
    for _ in range(10):
        q, dq, ddq = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2), rng.uniform(-5, 5, 2)
        np.testing.assert_allclose(planar_chain.mass_matrix(q), planar.mass_matrix(q), atol=1e-10)
        np.testing.assert_allclose(planar_chain.gravity_vector(q), planar.gravity_vector(q), atol=1e-10)
        np.testing.assert_allclose(
            planar_chain.inverse_dynamics(q, dq, ddq), planar.inverse_dynamics(q, dq, ddq), atol=1e-9
        )
        np.testing.assert_allclose(
            planar_chain.coriolis_matrix(q, dq), planar.coriolis_matrix(q, dq), atol=1e-6
        )
        np.testing.assert_allclose(
            planar_chain.momentum_input(q, dq, ddq), planar.momentum_input(q, dq, ddq), atol=1e-6
        )


def test_forward_dynamics_inverts_inverse_dynamics(planar, planar_chain, pendulum):
    rng = np.random.default_rng(21)
    for arm in (planar, planar_chain, pendulum):
        for _ in range(5):
            q, dq, ddq = (rng.uniform(-1.5, 1.5, arm.n) for _ in range(3))
            tau = arm.inverse_dynamics(q, dq, ddq)
            np.testing.assert_allclose(arm.forward_dynamics(q, dq, tau), ddq, atol=1e-9)


def test_chain_skew_symmetry(planar_chain):
    rng = np.random.default_rng(3)
    for _ in range(5):
        q, dq, z = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2), rng.uniform(-1, 1, 2)
        residual = mass_matrix_rate(planar_chain, q, dq) - 2.0 * planar_chain.coriolis_matrix(q, dq)
        assert abs(z @ residual @ z) < 1e-6


def test_free_motion_conserves_energy(planar, planar_links):
    q0, dq0 = np.array([0.3, 0.5]), np.zeros(2)
    times, q, dq = rollout(planar, q0, dq0, None, t_s=0.005, duration=2.0)
    energy = np.array(
        [planar.kinetic_energy(q_k, dq_k) + planar_potential(q_k, planar_links) for q_k, dq_k in zip(q, dq)]
    )
    assert times.shape == (400,)
    assert np.max(np.abs(energy - energy[0])) < 1e-6 * abs(energy[0])
    # the arm actually swings
    assert np.max(np.abs(q - q0)) > 0.1


def test_wrench_inverts_jacobian_transpose(planar):
    q = np.array([0.0, math.pi / 2])
    force = np.array([1.5, -2.0])
    tau = planar.jacobian(q).T @ force
    np.testing.assert_allclose(planar.cartesian_wrench(q, tau), force, atol=1e-8)


def test_wrench_rejects_singular_configurations(planar, planar_chain):
    with pytest.raises(SingularConfigurationError):
        planar.cartesian_wrench([0.4, 0.0], [1.0, 1.0])
    # two joints cannot span a six-axis wrench
    with pytest.raises(SingularConfigurationError):
        planar_chain.cartesian_wrench([0.4, 0.8], [1.0, 1.0])


def test_public_methods_validate_inputs(planar):
    with pytest.raises(InvalidInputError):
        planar.mass_matrix([0.1, 0.2, 0.3])
    with pytest.raises(InvalidInputError):
        planar.gravity_vector([np.nan, 0.0])


def test_simulation_records_consistent_torques(planar):
    friction = FrictionProfile(
        coulomb=[1.0, 0.6],
        viscous=[0.5, 0.3],
        stribeck=[0.4, 0.2],
        stribeck_velocity=[0.1, 0.1],
        noise_std_base=[0.0, 0.0],
        noise_std_slope=[0.0, 0.0],
    )

    def reference(t):
        q = np.array([0.3 * math.sin(t), 1.0 + 0.2 * math.cos(2 * t)])
        dq = np.array([0.3 * math.cos(t), -0.4 * math.sin(2 * t)])
        ddq = np.array([-0.3 * math.sin(t), -0.8 * math.cos(2 * t)])
        return q, dq, ddq

    def tau_ext(t):
        return np.array([2.0, 0.0]) if t >= 0.5 else np.zeros(2)

    run = simulate(planar, friction, reference, tau_ext, t_s=0.004, duration=1.0, seed=0)
    assert len(run) == 250
    expected = run.tau_ext + np.array([friction.deterministic(v) for v in run.dq])
    np.testing.assert_allclose(residual_torques(planar, run), expected, atol=1e-9)
    # tracking stays tight
    q_ref = np.array([reference(t)[0] for t in run.t])
    assert np.max(np.abs(run.q - q_ref)) < 1e-2


def test_free_simulation_matches_inverse_dynamics(planar, no_friction):
    run = simulate(planar, no_friction(2), hold([0.2, 1.0]), None, t_s=0.004, duration=0.4, seed=1)
    nominal = np.array(
        [planar.inverse_dynamics(q, dq, ddq) for q, dq, ddq in zip(run.q, run.dq, run.ddq)]
    )
    assert np.sqrt(np.mean((run.tau_m - nominal) ** 2)) < 1e-3
    np.testing.assert_array_equal(run.tau_ext, np.zeros_like(run.tau_ext))


def test_simulation_is_seeded(planar):
    friction = FrictionProfile(
        coulomb=[0.0, 0.0],
        viscous=[0.0, 0.0],
        stribeck=[0.0, 0.0],
        stribeck_velocity=[1.0, 1.0],
        noise_std_base=[0.05, 0.05],
        noise_std_slope=[0.0, 0.0],
    )
    first = simulate(planar, friction, hold([0.2, 1.0]), None, 0.004, 0.2, seed=5)
    again = simulate(planar, friction, hold([0.2, 1.0]), None, 0.004, 0.2, seed=5)
    other = simulate(planar, friction, hold([0.2, 1.0]), None, 0.004, 0.2, seed=6)
    np.testing.assert_array_equal(first.q, again.q)
    np.testing.assert_array_equal(first.tau_m, again.tau_m)
    assert not np.array_equal(first.q, other.q)


def test_simulation_reports_limit_violations(pendulum, no_friction):
    with pytest.raises(JointLimitViolationError) as info:
        simulate(pendulum, no_friction(1), hold([2.0]), None, 0.01, 0.1, seed=0)
    assert info.value.joint == 0
    assert info.value.time == 0.0


def test_simulation_rejects_friction_of_another_arm(pendulum, no_friction):
    with pytest.raises(InvalidInputError):
        simulate(pendulum, no_friction(2), hold([0.0]), None, 0.01, 0.1, seed=0)


def test_differentiated_acceleration():
    t = np.arange(20) * 0.01
    run = SampledTrajectory(
        t_s=0.01,
        t=t,
        q=(t**2)[:, None],
        dq=(2 * t)[:, None],
        ddq=np.zeros((20, 1)),
        tau_m=np.zeros((20, 1)),
    )
    exact = differentiated_acceleration(run)
    np.testing.assert_allclose(exact.ddq, 2.0, atol=1e-9)
    np.testing.assert_array_equal(exact.dq, run.dq)

    noisy = differentiated_acceleration(run, velocity_noise_std=0.01, seed=3)
    assert not np.array_equal(noisy.dq, run.dq)
    again = differentiated_acceleration(run, velocity_noise_std=0.01, seed=3)
    np.testing.assert_array_equal(noisy.ddq, again.ddq)


def test_simulation_draws_the_friction_noise(planar):
    friction = FrictionProfile(
        coulomb=[0.3, 0.1],
        viscous=[0.2, 0.1],
        stribeck=[0.0, 0.0],
        stribeck_velocity=[1.0, 1.0],
        noise_std_base=[0.05, 0.02],
        noise_std_slope=[0.1, 0.1],
    )

    def reference(t):
        return (
            np.array([0.3 * math.sin(t), 1.0]),
            np.array([0.3 * math.cos(t), 0.0]),
            np.array([-0.3 * math.sin(t), 0.0]),
        )

    run = simulate(planar, friction, reference, None, t_s=0.004, duration=0.2, seed=4)
    rng = np.random.default_rng(4)
    expected = np.array([friction.sample_noise(dq, rng) for dq in run.dq])
    deterministic = np.array([friction.deterministic(dq) for dq in run.dq])
    np.testing.assert_allclose(residual_torques(planar, run) - deterministic, expected, atol=1e-9)
    assert np.all(np.abs(expected) > 0.0)
