"""Two input qubits coupled to a single truncated bosonic mode, evolved unitarily."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_dm_stack, check_random_state
from .cv_reservoir import ObservableVector
from .exceptions import CutoffError, ValidationError
from .qubit import SIGMA_MINUS, DensityMatrix

LEAKAGE_TOL = 1e-6


@dataclass(frozen=True)
class HybridConfig:
    """Parameters of the qubit-input / single-mode reservoir (frequencies in units of Γ)."""

    detunings_in: tuple
    detuning_qn: float
    couplings: tuple
    pump: float
    fock_cutoff: int = 20
    gamma_scale: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "detunings_in", tuple(float(d) for d in self.detunings_in))
        object.__setattr__(self, "couplings", tuple(float(k) for k in self.couplings))
        if len(self.detunings_in) != 2 or len(self.couplings) != 2:
            raise ValidationError("hybrid system has exactly two input qubits")
        if self.fock_cutoff < 2:
            raise ValidationError("fock_cutoff must be at least 2")
        if self.gamma_scale <= 0:
            raise ValidationError("gamma_scale must be positive")

    @property
    def time_step(self) -> float:
        return np.pi / (10.0 * self.gamma_scale)

    def to_dict(self) -> dict:
        return {
            "detunings_in": list(self.detunings_in), "detuning_qn": self.detuning_qn,
            "couplings": list(self.couplings), "pump": self.pump,
            "fock_cutoff": self.fock_cutoff, "gamma_scale": self.gamma_scale, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HybridConfig":
        return cls(**data)


def sample_hybrid_params(gamma_scale: float = 1.0, fock_cutoff: int = 20, rng=None, seed=None) -> HybridConfig:
    """Draw ``Δ_n, Λ, K_n`` and ``2P`` uniformly from ``[1, 2]Γ``."""
    rng = check_random_state(rng if rng is not None else seed)
    d1, d2, lam, k1, k2, two_p = rng.uniform(gamma_scale, 2 * gamma_scale, 6)
    return HybridConfig((d1, d2), lam, (k1, k2), two_p / 2, fock_cutoff, gamma_scale, seed)


def hybrid_hamiltonian(config: HybridConfig) -> NDArray[np.complex128]:
    """Hamiltonian on ``qubit ⊗ qubit ⊗ Fock(d)``."""
    d = config.fock_cutoff
    b = np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)
    eye2, eyed = np.eye(2), np.eye(d)
    a1 = np.kron(np.kron(SIGMA_MINUS, eye2), eyed)
    a2 = np.kron(np.kron(eye2, SIGMA_MINUS), eyed)
    bb = np.kron(np.eye(4), b)
    H = config.detuning_qn * bb.conj().T @ bb + config.pump * (bb + bb.conj().T)
    for a, delta, k in zip((a1, a2), config.detunings_in, config.couplings):
        H += delta * a.conj().T @ a + k * (a @ bb.conj().T + bb @ a.conj().T)
    return H


class HybridChannel:
    """
    Linear map from a two-qubit input to the mode occupation at ``k·π/(10Γ)``.

    The single-step propagator is exponentiated once and reused. Because the
    mode starts in vacuum only the four columns ``U^k |a, 0>`` are needed.
    """

    def __init__(self, config: HybridConfig, n_multiplex: int):
        if n_multiplex < 1:
            raise ValidationError("n_multiplex must be at least 1")
        d = config.fock_cutoff
        self.config = config
        self.times = [config.time_step * k for k in range(1, n_multiplex + 1)]
        step = expm(-1j * hybrid_hamiltonian(config) * config.time_step)
        number = np.tile(np.arange(d, dtype=float), 4)
        top = np.tile((np.arange(d) >= d - 2).astype(float), 4)
        psi = np.zeros((4 * d, 4), dtype=complex)
        psi[np.arange(4) * d, np.arange(4)] = 1.0
        maps, leaks = [], []
        for _ in range(n_multiplex):
            psi = step @ psi
            # tr(N U|a0><b0|U†) = <ψ_b|N|ψ_a>, stored against ρ_ab
            maps.append((psi.conj().T @ (number[:, None] * psi)).T.ravel())
            leaks.append((psi.conj().T @ (top[:, None] * psi)).T.ravel())
        self.matrix = np.array(maps)
        self.leakage_matrix = np.array(leaks)

    def leakage(self, rhos: NDArray) -> NDArray[np.float64]:
        flat = np.asarray(rhos, dtype=complex).reshape(-1, 16)
        return (flat @ self.leakage_matrix.T).real

    def __call__(self, rhos: NDArray, check_leakage: bool = True) -> NDArray[np.float64]:
        flat = np.asarray(rhos, dtype=complex).reshape(-1, 16)
        if check_leakage:
            worst = float(self.leakage(flat).max())
            if worst > LEAKAGE_TOL:
                raise CutoffError(
                    f"population {worst:.3g} in the top two Fock levels exceeds {LEAKAGE_TOL:g}; "
                    f"increase fock_cutoff beyond {self.config.fock_cutoff}"
                )
        return (flat @ self.matrix.T).real


def run_hybrid_probe(config: HybridConfig, rho_in, n_multiplex: int) -> ObservableVector:
    """Mode occupation ``<b†b>`` at ``{1..T}·π/(10Γ)`` with the mode starting in vacuum."""
    rho = rho_in if isinstance(rho_in, DensityMatrix) else DensityMatrix(rho_in, (2, 2))
    if rho.dim != 4:
        raise ValidationError("input state must be a two-qubit density matrix")
    channel = HybridChannel(config, n_multiplex)
    labels = [(0, "excitation", t) for t in channel.times]
    return ObservableVector(channel(rho.matrix)[0], labels)


class HybridReservoir(TransformerMixin, BaseEstimator):
    """Transformer from two-qubit density matrices to multiplexed mode occupations."""

    def __init__(self, n_multiplex=15, fock_cutoff=20, gamma_scale=1.0, check_leakage=True,
                 config=None, random_state=None):
        self.n_multiplex = n_multiplex
        self.fock_cutoff = fock_cutoff
        self.gamma_scale = gamma_scale
        self.check_leakage = check_leakage
        self.config = config
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.config is not None:
            self.config_ = self.config
        else:
            seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else None
            self.config_ = sample_hybrid_params(self.gamma_scale, self.fock_cutoff,
                                                check_random_state(self.random_state), seed)
        self.channel_ = HybridChannel(self.config_, self.n_multiplex)
        self.n_features_out_ = self.n_multiplex
        return self

    def transform(self, X):
        if not hasattr(self, "channel_"):
            raise AttributeError("HybridReservoir is not fitted; call fit first")
        return self.channel_(check_dm_stack(X, dim=4), self.check_leakage)
