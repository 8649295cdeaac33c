from __future__ import annotations

import numpy as np
import pytest

from qres.exceptions import ValidationError
from qres.gaussian import GaussianPropagator, LinearDynamics, is_physical, log_negativity, symplectic_form
from qres.qubit import negativity
from qres.states import (
    CV_PARAM_SCALES,
    gen_cv_input,
    gen_qubit_input,
    generate_ensemble,
    two_mode_hamiltonian_matrix,
)


class TestCVInputs:
    @pytest.mark.parametrize("params", [(0, 0, 0, 0, 0), (0.7, 0.3, 0, 0, 0)])
    def test_free_evolution_keeps_vacuum(self, params):
        drift = symplectic_form(2) @ two_mode_hamiltonian_matrix(*params)
        v = GaussianPropagator(LinearDynamics(drift, np.zeros((4, 4))), np.pi / 2).covariance(0.5 * np.eye(4))
        np.testing.assert_allclose(v, 0.5 * np.eye(4), atol=1e-14)

    def test_parameter_ranges(self):
        np.testing.assert_array_equal(CV_PARAM_SCALES, [1, 1, 1, 0.3, 0.3])

    def test_hamiltonian_matrix_symmetric(self):
        g = two_mode_hamiltonian_matrix(0.3, 0.7, 0.5, 0.1, 0.2)
        np.testing.assert_array_equal(g, g.T)

    def test_physical_and_entangled_profile(self):
        rng = np.random.default_rng(0)
        ents = []
        for _ in range(1000):
            v = gen_cv_input(rng)
            assert is_physical(v)
            ents.append(log_negativity(v))
        ents = np.array(ents)
        assert ents.min() >= 0 and 0.5 < ents.max() < 5
        assert np.mean(ents > 0) > 0.9

    def test_separable_branch(self):
        rng = np.random.default_rng(1)
        cross = []
        for _ in range(300):
            v = gen_cv_input(rng, separable=True)
            assert is_physical(v)
            assert log_negativity(v) == 0.0
            cross.append(np.abs(v.matrix[:2, 2:]).max())
        # classically correlated, not a product state
        assert np.median(cross) > 1e-3

    def test_deterministic(self):
        a = gen_cv_input(np.random.default_rng(7)).matrix
        b = gen_cv_input(np.random.default_rng(7)).matrix
        np.testing.assert_array_equal(a, b)

    def test_invalid_scale(self):
        with pytest.raises(ValidationError):
            gen_cv_input(np.random.default_rng(0), gamma_scale=0)


class TestQubitInputs:
    def test_valid_density_matrices(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            rho = gen_qubit_input(rng).matrix
            np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
            assert np.trace(rho).real == pytest.approx(1, abs=1e-10)
            assert np.linalg.eigvalsh(rho).min() >= -1e-9

    def test_entanglement_profile(self):
        rng = np.random.default_rng(3)
        ents = np.array([negativity(gen_qubit_input(rng)) for _ in range(1000)])
        assert ents.max() < 0.5 and ents.max() > 0.2
        assert np.mean(ents > 0) > 0.3

    def test_scale_cancels(self):
        a = gen_qubit_input(np.random.default_rng(4), scale=10.0).matrix
        b = gen_qubit_input(np.random.default_rng(4), scale=1.0).matrix
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_separable_branch(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            assert negativity(gen_qubit_input(rng, separable=True)) <= 1e-10


class TestEnsembles:
    @pytest.mark.parametrize("kind", ["cv_entangled", "cv_separable", "qubit_random", "qubit_separable"])
    def test_kinds(self, kind):
        ens = generate_ensemble(kind, 8, seed=3)
        assert len(ens) == 8 and ens.true_entanglement.shape == (8,)
        if kind.endswith("separable"):
            assert ens.true_entanglement.max() <= 1e-9

    def test_substreams_independent_of_size(self):
        small = generate_ensemble("cv_entangled", 3, seed=9)
        large = generate_ensemble("cv_entangled", 10, seed=9)
        np.testing.assert_array_equal(small.matrices, large.matrices[:3])

    def test_streams_differ(self):
        a = generate_ensemble("qubit_random", 2, seed=9, stream=0)
        b = generate_ensemble("qubit_random", 2, seed=9, stream=1)
        assert not np.allclose(a.matrices, b.matrices)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            generate_ensemble("bogus", 3, 0)
        with pytest.raises(ValidationError):
            generate_ensemble("cv_entangled", 0, 0)
