from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from qres.exceptions import CutoffError
from qres.hybrid import (
    HybridChannel,
    HybridConfig,
    HybridReservoir,
    hybrid_hamiltonian,
    run_hybrid_probe,
    sample_hybrid_params,
)
from qres.qubit import negativity
from qres.states import gen_qubit_input


def _direct(cfg, rho_in, k):
    """⟨b†b⟩ after k steps from ρ_in ⊗ |0><0| by brute-force unitary propagation."""
    d = cfg.fock_cutoff
    vac = np.zeros((d, d))
    vac[0, 0] = 1
    u = np.linalg.matrix_power(expm(-1j * hybrid_hamiltonian(cfg) * cfg.time_step), k)
    rho = u @ np.kron(rho_in, vac) @ u.conj().T
    number = np.kron(np.eye(4), np.diag(np.arange(d)))
    return np.trace(number @ rho).real, rho


class TestHybrid:
    def test_sampling_ranges(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            cfg = sample_hybrid_params(rng=rng)
            vals = np.array([*cfg.detunings_in, cfg.detuning_qn, *cfg.couplings, 2 * cfg.pump])
            assert vals.min() >= 1 and vals.max() <= 2

    def test_hamiltonian_hermitian(self):
        h = hybrid_hamiltonian(sample_hybrid_params(seed=1, fock_cutoff=6))
        np.testing.assert_allclose(h, h.conj().T)

    def test_channel_matches_direct(self, rng):
        cfg = sample_hybrid_params(seed=2, fock_cutoff=25)
        ch = HybridChannel(cfg, 5)
        for _ in range(3):
            rho_in = gen_qubit_input(rng).matrix
            out = ch(rho_in, check_leakage=False)[0]
            for k in (1, 3, 5):
                assert out[k - 1] == pytest.approx(_direct(cfg, rho_in, k)[0], abs=1e-10)

    def test_purity_conserved(self, rng):
        cfg = sample_hybrid_params(seed=3, fock_cutoff=15)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        _, rho = _direct(cfg, np.outer(psi, psi.conj()), 4)
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-10)

    def test_zero_coupling_keeps_entanglement_off_mode(self):
        bell = np.zeros((4, 4), dtype=complex)
        bell[np.ix_([0, 3], [0, 3])] = 0.5
        cfg = HybridConfig((1.2, 1.5), 1.3, (0.0, 0.0), 0.0, fock_cutoff=6)
        out = HybridChannel(cfg, 4)(bell)
        np.testing.assert_allclose(out, 0.0, atol=1e-14)
        _, rho = _direct(cfg, bell, 4)
        qubits = rho.reshape(4, 6, 4, 6).trace(axis1=1, axis2=3)
        assert negativity(qubits) == pytest.approx(0.5, abs=1e-12)

    def test_time_grid(self):
        cfg = sample_hybrid_params(seed=0, gamma_scale=2.0, fock_cutoff=6)
        np.testing.assert_allclose(HybridChannel(cfg, 3).times, np.pi / 20 * np.array([1, 2, 3]))

    def test_cutoff_error(self):
        cfg = HybridConfig((1.0, 1.0), 1.0, (2.0, 2.0), 3.0, fock_cutoff=3)
        with pytest.raises(CutoffError, match="fock_cutoff"):
            HybridChannel(cfg, 5)(np.eye(4) / 4)

    def test_leakage_matches_direct(self, rng):
        cfg = sample_hybrid_params(seed=4, fock_cutoff=8)
        rho_in = gen_qubit_input(rng).matrix
        leak = HybridChannel(cfg, 3).leakage(rho_in)[0, 2]
        _, rho = _direct(cfg, rho_in, 3)
        top = np.kron(np.eye(4), np.diag((np.arange(8) >= 6).astype(float)))
        assert leak == pytest.approx(np.trace(top @ rho).real, abs=1e-12)

    def test_transformer(self, rng):
        x = np.stack([gen_qubit_input(rng).matrix for _ in range(4)])
        res = HybridReservoir(n_multiplex=6, check_leakage=False, random_state=1).fit()
        out = res.transform(x)
        assert out.shape == (4, 6)
        np.testing.assert_allclose(out[2], run_hybrid_probe(res.config_, x[2], 6).values)

    def test_config_round_trip(self):
        cfg = sample_hybrid_params(seed=9)
        assert HybridConfig.from_dict(cfg.to_dict()) == cfg


def test_information_monotone_in_multiplexing(tmp_path):
    from qres.experiments import make_scenario, run_scenario

    sc = make_scenario("custom", system="hybrid", sweep_axis="n_multiplex", sweep=tuple(range(1, 18)),
                       n_realizations=10, n_test=50, check_leakage=False, seed=11)
    means = run_scenario(sc, tmp_path / "h").values[0].mean(axis=1)
    # beyond the cliff both sides sit at round-off, hence the absolute slack
    assert all(b <= a + 1e-10 for a, b in zip(means, means[1:])), means
    assert means[13] >= 1e-2 and means[14] <= 1e-6
