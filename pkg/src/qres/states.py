"""Random two-mode Gaussian and two-qubit input states, entangled or separable."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ._validation import check_random_state
from .exceptions import ValidationError
from .gaussian import (
    CovarianceMatrix,
    GaussianPropagator,
    LinearDynamics,
    is_physical,
    log_negativity,
    symplectic_form,
)
from .qubit import DensityMatrix, negativity

KINDS = ("cv_entangled", "cv_separable", "qubit_random", "qubit_separable")
# Ranges of (Δ1, Δ2, K, P'1, P'2) in units of Γ.
CV_PARAM_SCALES = np.array([1.0, 1.0, 1.0, 0.3, 0.3])
MAX_REDRAWS = 100


def two_mode_hamiltonian_matrix(d1, d2, k, s1, s2) -> NDArray[np.float64]:
    """
    Quadratic form ``G`` with ``H = ½ uᵀ G u`` (up to a constant) for
    ``Δ1 a1†a1 + Δ2 a2†a2 + K(a1 a2† + h.c.) + Σ P'_n (a_n² + a_n†²)``.
    """
    g = np.zeros((4, 4))
    g[0, 0] = d1 + 2 * s1
    g[1, 1] = d1 - 2 * s1
    g[2, 2] = d2 + 2 * s2
    g[3, 3] = d2 - 2 * s2
    g[0, 2] = g[2, 0] = k
    g[1, 3] = g[3, 1] = k
    return g


def gen_cv_input(rng=None, gamma_scale: float = 1.0, separable: bool = False) -> CovarianceMatrix:
    """
    Random two-mode covariance matrix from coupled, two-photon-driven modes.

    The entangled branch evolves vacuum for ``π/(2Γ)``; the separable branch
    evolves the thermal state ``1.5 I`` for ``1/(2Γ)`` and is redrawn in the
    (practically unreachable) case that it comes out entangled.
    """
    if gamma_scale <= 0:
        raise ValidationError("gamma_scale must be positive")
    rng = check_random_state(rng)
    for _ in range(MAX_REDRAWS):
        params = CV_PARAM_SCALES * rng.uniform(0, gamma_scale, 5)
        drift = symplectic_form(2) @ two_mode_hamiltonian_matrix(*params)
        dyn = LinearDynamics(drift, np.zeros((4, 4)))
        if separable:
            v0, t = 1.5 * np.eye(4), 1.0 / (2 * gamma_scale)
        else:
            v0, t = 0.5 * np.eye(4), np.pi / (2 * gamma_scale)
        v = GaussianPropagator(dyn, t).covariance(v0)
        if not np.all(np.isfinite(v)) or not is_physical(v):
            raise ValidationError("random input generation produced an unphysical covariance matrix")
        if not separable or log_negativity(v) == 0.0:
            return CovarianceMatrix(v, "interleaved")
    raise ValidationError("could not draw a separable covariance matrix")


def gen_qubit_input(rng=None, separable: bool = False, scale: float = 10.0) -> DensityMatrix:
    """
    Random two-qubit density matrix ``ρ = Z Z† / tr(Z Z†)``.

    ``Z / scale = 2(υ1 + iυ2) - (1+i)J + h.c.`` with standard-normal ``υ``; the
    scale cancels on normalization. The separable branch dephases the first
    qubit in a Haar-random basis.
    """
    rng = check_random_state(rng)
    u1 = rng.standard_normal((4, 4))
    u2 = rng.standard_normal((4, 4))
    base = 2 * (u1 + 1j * u2) - (1 + 1j) * np.ones((4, 4))
    z = scale * (base + base.conj().T)
    rho = z @ z.conj().T
    rho /= np.trace(rho).real
    if separable:
        psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi /= np.linalg.norm(psi)
        proj = np.outer(psi, psi.conj())
        pi1 = np.kron(proj, np.eye(2))
        pi2 = np.kron(np.eye(2) - proj, np.eye(2))
        rho = pi1 @ rho @ pi1 + pi2 @ rho @ pi2
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, (2, 2))


@dataclass(frozen=True)
class InputEnsemble:
    """A seeded batch of input states with their exact entanglement."""

    kind: str
    states: tuple
    true_entanglement: NDArray[np.float64]
    seed: int

    @property
    def matrices(self) -> NDArray:
        return np.stack([s.matrix for s in self.states])

    def __len__(self):
        return len(self.states)


def state_entanglement(state) -> float:
    if isinstance(state, CovarianceMatrix):
        return log_negativity(state)
    return negativity(state)


def generate_ensemble(kind: str, n: int, seed: int, gamma_scale: float = 1.0, stream: int = 0) -> InputEnsemble:
    """
    Generate ``n`` states of one kind.

    State ``i`` draws from the substream keyed by ``(seed, stream, i)`` so that
    ensembles can be produced in any order or in parallel with identical results.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown ensemble kind {kind!r}; choose from {KINDS}")
    if n < 1:
        raise ValidationError("ensemble size must be positive")
    states = []
    for i in range(n):
        rng = np.random.default_rng([seed, stream, i])
        if kind.startswith("cv"):
            states.append(gen_cv_input(rng, gamma_scale, separable=kind == "cv_separable"))
        else:
            states.append(gen_qubit_input(rng, separable=kind == "qubit_separable"))
    ent = np.array([state_entanglement(s) for s in states])
    return InputEnsemble(kind, tuple(states), ent, seed)
