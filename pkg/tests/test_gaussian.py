from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_physical_cm, random_symplectic, rk4_lyapunov, two_mode_log_negativity_oracle
from qres.exceptions import DivergenceError, ValidationError
from qres.gaussian import (
    CovarianceMatrix,
    GaussianPropagator,
    LinearDynamics,
    evolve_gaussian,
    is_physical,
    log_negativity,
    log_negativity_batch,
    partial_transpose,
    symplectic_eigenvalues,
    symplectic_form,
    two_mode_squeezed_vacuum,
)


class TestSymplecticForm:
    def test_single_mode(self):
        np.testing.assert_array_equal(symplectic_form(1), [[0, 1], [-1, 0]])

    def test_two_modes_block_diagonal(self):
        om = symplectic_form(2)
        np.testing.assert_array_equal(om[:2, 2:], 0)
        np.testing.assert_array_equal(om[2:, 2:], [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_orthogonal_and_antisymmetric(self, n):
        om = symplectic_form(n)
        np.testing.assert_array_equal(om @ om.T, np.eye(2 * n))
        np.testing.assert_array_equal(om @ om, -np.eye(2 * n))


class TestCovarianceMatrix:
    def test_vacuum(self):
        cm = CovarianceMatrix.vacuum(3)
        assert cm.n_modes == 3
        np.testing.assert_array_equal(cm.matrix, 0.5 * np.eye(6))

    def test_rejects_asymmetric(self):
        m = 0.5 * np.eye(2)
        m[0, 1] = 0.1
        with pytest.raises(ValidationError):
            CovarianceMatrix(m)

    def test_rejects_odd_size(self):
        with pytest.raises(ValidationError):
            CovarianceMatrix(np.eye(3))

    def test_immutable(self):
        cm = CovarianceMatrix.vacuum(1)
        with pytest.raises(ValueError):
            cm.matrix[0, 0] = 3.0


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        np.testing.assert_allclose(symplectic_eigenvalues(0.5 * np.eye(6)), [0.5] * 3)

    def test_thermal(self):
        np.testing.assert_allclose(symplectic_eigenvalues(np.diag([1.5, 1.5])), [1.5])

    def test_tmsv_is_pure(self):
        np.testing.assert_allclose(symplectic_eigenvalues(two_mode_squeezed_vacuum(1.0)), [0.5, 0.5], atol=1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(ValidationError):
            symplectic_eigenvalues(np.diag([1.0, -1.0]))

    def test_symplectic_invariance(self, rng):
        for _ in range(50):
            v = random_physical_cm(rng, 3)
            s = random_symplectic(rng, 3)
            np.testing.assert_allclose(symplectic_eigenvalues(s @ v @ s.T, validate=False),
                                       symplectic_eigenvalues(v), rtol=1e-8)


class TestPhysicality:
    def test_vacuum_physical(self):
        check = is_physical(0.5 * np.eye(2))
        assert check and check.min_symplectic_eigenvalue == pytest.approx(0.5)

    def test_below_vacuum(self):
        check = is_physical(0.4 * np.eye(2))
        assert not check
        assert check.min_symplectic_eigenvalue == pytest.approx(0.4)

    def test_squeezed_but_physical(self):
        assert is_physical(np.diag([10.0, 0.025]))

    def test_indefinite_is_not_physical(self):
        assert not is_physical(np.diag([1.0, -0.1]))


class TestLogNegativity:
    def test_vacuum_and_thermal_zero(self):
        assert log_negativity(0.5 * np.eye(4)) == 0.0
        assert log_negativity(1.5 * np.eye(4)) == 0.0

    def test_tmsv_r1(self):
        assert log_negativity(two_mode_squeezed_vacuum(1.0)) == pytest.approx(2.0, abs=1e-10)

    @given(st.floats(min_value=0.0, max_value=2.0))
    @settings(max_examples=60, deadline=None)
    def test_tmsv_is_2r(self, r):
        assert log_negativity(two_mode_squeezed_vacuum(r)) == pytest.approx(2 * r, abs=1e-8)

    def test_never_negative_zero(self):
        out = log_negativity(0.5 * np.eye(4))
        assert np.copysign(1.0, out) == 1.0

    def test_matches_invariant_oracle(self, rng):
        for _ in range(200):
            v = random_physical_cm(rng, 2)
            assert log_negativity(v) == pytest.approx(two_mode_log_negativity_oracle(v), abs=1e-9)

    def test_local_symplectic_invariance(self, rng):
        for _ in range(30):
            v = random_physical_cm(rng, 2)
            s = np.zeros((4, 4))
            s[:2, :2] = random_symplectic(rng, 1)
            s[2:, 2:] = random_symplectic(rng, 1)
            assert log_negativity(s @ v @ s.T, validate=False) == pytest.approx(log_negativity(v), abs=1e-9)

    def test_unphysical_reports_eigenvalue(self):
        with pytest.raises(ValidationError, match="minimum symplectic eigenvalue"):
            log_negativity(0.3 * np.eye(4))

    def test_partition_forms_agree(self, rng):
        v = random_physical_cm(rng, 2)
        assert log_negativity(v, partition=[0]) == log_negativity(v, partition=([0], [1]))

    def test_invalid_partition(self):
        with pytest.raises(ValidationError):
            log_negativity(0.5 * np.eye(4), partition=([0], [0]))

    def test_partial_transpose_flips_momentum(self):
        v = two_mode_squeezed_vacuum(0.5)
        pt = partial_transpose(v)
        assert pt[1, 3] == -v[1, 3] and pt[0, 2] == v[0, 2]

    def test_batch_matches_scalar(self, rng):
        vs = np.stack([random_physical_cm(rng, 2) for _ in range(20)])
        np.testing.assert_allclose(log_negativity_batch(vs), [log_negativity(v) for v in vs], atol=1e-14)


def _random_dynamics(rng, n_modes):
    n = 2 * n_modes
    a = rng.normal(size=(n, n)) * 0.5 - 0.6 * np.eye(n)
    g = rng.normal(size=(n, n))
    d = 0.2 * g @ g.T
    return LinearDynamics(a, d, rng.normal(size=n))


class TestEvolveGaussian:
    def test_zero_generator(self, rng):
        v0 = random_physical_cm(rng, 2)
        dyn = LinearDynamics(np.zeros((4, 4)), np.zeros((4, 4)))
        v, u = evolve_gaussian(dyn, v0, None, 7.0)
        np.testing.assert_allclose(v.matrix, v0, rtol=1e-12)
        np.testing.assert_array_equal(u, 0)

    @pytest.mark.parametrize("method", ["ode", "expm"])
    def test_pure_loss_closed_form(self, method):
        dyn = LinearDynamics(-np.eye(2), np.eye(2))
        v, _ = evolve_gaussian(dyn, 1.5 * np.eye(2), None, 1.0, method=method)
        expected = np.exp(-2.0) * 1.0 + 0.5
        np.testing.assert_allclose(v.matrix, expected * np.eye(2), rtol=1e-9)
        assert expected == pytest.approx(0.635335, abs=1e-6)

    def test_pure_loss_against_rk4(self):
        oracle = rk4_lyapunov(-np.eye(2), np.eye(2), 1.5 * np.eye(2), 1.0, dt=1e-5)
        v, _ = evolve_gaussian(LinearDynamics(-np.eye(2), np.eye(2)), 1.5 * np.eye(2), None, 1.0)
        np.testing.assert_allclose(v.matrix, oracle, rtol=1e-9)

    def test_vacuum_fixed_point(self):
        dyn = LinearDynamics(-np.eye(2), np.eye(2))
        for t in (0.1, 1.0, 10.0):
            v, _ = evolve_gaussian(dyn, 0.5 * np.eye(2), None, t)
            np.testing.assert_allclose(v.matrix, 0.5 * np.eye(2), atol=1e-12)

    def test_ode_matches_expm(self, rng):
        for _ in range(10):
            dyn = _random_dynamics(rng, 2)
            v0, u0 = random_physical_cm(rng, 2), rng.normal(size=4)
            v1, u1 = evolve_gaussian(dyn, v0, u0, 0.8, method="ode")
            v2, u2 = evolve_gaussian(dyn, v0, u0, 0.8, method="expm")
            np.testing.assert_allclose(v1.matrix, v2.matrix, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(u1, u2, rtol=1e-8, atol=1e-10)

    def test_composition(self, rng):
        dyn = _random_dynamics(rng, 2)
        v0, u0 = random_physical_cm(rng, 2), rng.normal(size=4)
        v_full, u_full = evolve_gaussian(dyn, v0, u0, 1.0)
        v_half, u_half = evolve_gaussian(dyn, v0, u0, 0.4)
        v_two, u_two = evolve_gaussian(dyn, v_half, u_half, 0.6)
        np.testing.assert_allclose(v_two.matrix, v_full.matrix, rtol=1e-9)
        np.testing.assert_allclose(u_two, u_full, rtol=1e-9, atol=1e-12)

    def test_symmetry_and_physicality_preserved(self, rng):
        # A = ΩG - damping with D ≥ damping terms is a valid quantum channel
        from qres.gaussian import symplectic_form

        for _ in range(10):
            g = rng.normal(size=(4, 4))
            k = rng.uniform(0, 0.5, 2)
            a = symplectic_form(2) @ (g + g.T) - np.diag(np.repeat(k, 2))
            dyn = LinearDynamics(a, np.diag(np.repeat(k, 2)))
            v, _ = evolve_gaussian(dyn, 0.5 * np.eye(4), None, 0.7)
            assert np.abs(v.matrix - v.matrix.T).max() <= 1e-12
            assert is_physical(v).min_symplectic_eigenvalue >= 0.5 - 1e-9

    def test_mean_with_drive(self):
        # du/dt = -u + h -> u(t) = h (1 - e^{-t})
        dyn = LinearDynamics(-np.eye(2), np.zeros((2, 2)), [1.0, -2.0])
        _, u = evolve_gaussian(dyn, 0.5 * np.eye(2), np.zeros(2), 2.0)
        np.testing.assert_allclose(u, np.array([1.0, -2.0]) * (1 - np.exp(-2.0)), rtol=1e-9)

    def test_divergence_names_time(self):
        dyn = LinearDynamics(800.0 * np.eye(2), np.zeros((2, 2)))
        with pytest.raises(DivergenceError, match="time step") as info:
            evolve_gaussian(dyn, np.eye(2), None, 2.0)
        assert info.value.time is not None

    def test_bad_inputs(self):
        dyn = LinearDynamics(np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            evolve_gaussian(dyn, 0.5 * np.eye(4), None, 1.0)
        with pytest.raises(ValidationError):
            evolve_gaussian(dyn, 0.5 * np.eye(2), None, -1.0)
        with pytest.raises(ValidationError):
            evolve_gaussian(dyn, 0.5 * np.eye(2), None, 1.0, method="euler")

    def test_dynamics_validation(self):
        with pytest.raises(ValidationError):
            LinearDynamics(np.zeros((2, 2)), -np.eye(2))
        with pytest.raises(ValidationError):
            LinearDynamics(np.zeros((2, 2)), np.eye(3))

    def test_propagator_stack(self, rng):
        dyn = _random_dynamics(rng, 2)
        prop = GaussianPropagator(dyn, 0.5)
        vs = np.stack([random_physical_cm(rng, 2) for _ in range(5)])
        out = prop.covariance(vs)
        for v, o in zip(vs, out):
            np.testing.assert_allclose(o, prop.covariance(v), rtol=1e-13)
