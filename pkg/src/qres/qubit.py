"""
Qubit reservoir driven by two input qubits, evolved under a Lindblad master equation.

Single-qubit basis is ``(|g>, |e>)``; the lowering operator is ``|g><e|`` and
``σz |e> = +|e>``, so the ground state has ``<σz> = -1``. Joint states put the
two input qubits first, followed by the reservoir qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_dm_stack, check_random_state
from .cv_reservoir import ObservableVector, _check_times
from .exceptions import CapacityError, IntegrationError, ValidationError

N_INPUTS = 2
MAX_QUBITS = 8
OBSERVABLE_SETS = ("pauli_triple", "excitation")

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
PAULIS = (np.eye(2, dtype=complex), SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite state of a composite system."""

    matrix: NDArray[np.complex128]
    subsystem_dims: tuple = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        dims = (m.shape[0],) if self.subsystem_dims is None else tuple(int(d) for d in self.subsystem_dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValidationError(f"subsystem dims {dims} do not multiply to {m.shape[0]}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ValidationError(f"density matrix has trace {np.trace(m).real:.12g}")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValidationError("density matrix has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "subsystem_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def _embed(op: NDArray, site: int, n_sites: int) -> sp.csr_matrix:
    eye = sp.identity(2, format="csr", dtype=complex)
    factors = [sp.csr_matrix(op) if k == site else eye for k in range(n_sites)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def partial_transpose(rho: NDArray, dims: Sequence[int], transpose_party: Sequence[int] = (1,)) -> NDArray:
    """Partial transpose of ``rho`` on the listed subsystems."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    perm = list(range(2 * n))
    for k in transpose_party:
        perm[k], perm[n + k] = perm[n + k], perm[k]
    d = int(np.prod(dims))
    return t.transpose(perm).reshape(d, d)


def negativity(rho, partition: Sequence[int] = (1,), dims: Sequence[int] | None = None) -> float:
    """
    Negativity: summed magnitude of the negative eigenvalues of the partial transpose.

    ``partition`` lists the subsystems that are transposed.
    """
    mat = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    if dims is None:
        dims = getattr(rho, "subsystem_dims", None) or (2, mat.shape[0] // 2)
    dims = tuple(dims)
    if int(np.prod(dims)) != mat.shape[0]:
        raise ValidationError(f"subsystem dims {dims} do not match matrix size {mat.shape[0]}")
    part = sorted(set(int(k) for k in partition))
    if not part or any(k < 0 or k >= len(dims) for k in part) or len(part) == len(dims):
        raise ValidationError(f"invalid bipartition {tuple(partition)} of subsystems {dims}")
    pt = partial_transpose(0.5 * (mat + mat.conj().T), dims, part)
    eigs = np.linalg.eigvalsh(pt)
    return float(-eigs[eigs < 0].sum()) + 0.0


def negativity_batch(rhos, dims=(2, 2), partition=(1,)) -> NDArray[np.float64]:
    """Negativity of a stack of (not necessarily positive) Hermitian matrices."""
    mats = np.asarray(rhos, dtype=complex)
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    dims = list(dims)
    n = len(dims)
    d = int(np.prod(dims))
    t = mats.reshape(mats.shape[:-2] + tuple(dims + dims))
    lead = mats.ndim - 2
    perm = list(range(2 * n))
    for k in partition:
        perm[k], perm[n + k] = perm[n + k], perm[k]
    t = t.transpose(list(range(lead)) + [lead + p for p in perm]).reshape(mats.shape[:-2] + (d, d))
    eigs = np.linalg.eigvalsh(t)
    return -np.where(eigs < 0, eigs, 0.0).sum(axis=-1) + 0.0


def _vectorized_lindbladian(H: sp.spmatrix, collapse_terms) -> sp.csr_matrix:
    # Row-major vec: vec(A X B) = (A ⊗ Bᵀ) vec(X).
    d = H.shape[0]
    eye = sp.identity(d, format="csr", dtype=complex)
    gen = -1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for op, rate in collapse_terms:
        if rate == 0:
            continue
        op = sp.csr_matrix(op, dtype=complex)
        opd = op.conj().T
        nn = (opd @ op).tocsr()
        gen = gen + (rate / 2.0) * (
            2.0 * sp.kron(op, op.conj()) - sp.kron(nn, eye) - sp.kron(eye, nn.T)
        )
    return sp.csr_matrix(gen)


def lindblad_evolve(
    H,
    collapse_terms: Sequence[tuple],
    rho0,
    t: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> DensityMatrix:
    """
    Integrate ``dρ/dt = -i[H, ρ] + Σ (rate/2)(2XρX† - {X†X, ρ})`` up to time ``t``.

    Uses an adaptive Runge-Kutta 4(5) integrator on the density matrix; raises
    :class:`IntegrationError` if the trace drifts by more than ``1e-8``.
    """
    if t < 0:
        raise ValidationError("evolution time must be nonnegative")
    dims = getattr(rho0, "subsystem_dims", None)
    r0 = np.asarray(getattr(rho0, "matrix", rho0), dtype=complex)
    Hd = np.asarray(H.toarray() if sp.issparse(H) else H, dtype=complex)
    d = r0.shape[0]
    if Hd.shape != (d, d):
        raise ValidationError(f"Hamiltonian shape {Hd.shape} does not match state dimension {d}")
    ops = []
    for op, rate in collapse_terms:
        if rate < 0:
            raise ValidationError("collapse rates must be nonnegative")
        op = np.asarray(op.toarray() if sp.issparse(op) else op, dtype=complex)
        if op.shape != (d, d):
            raise ValidationError(f"collapse operator shape {op.shape} does not match dimension {d}")
        if rate:
            ops.append((op, op.conj().T @ op, rate / 2.0))
    if t == 0:
        return DensityMatrix(r0, dims)

    def rhs(_, y):
        rho = y.reshape(d, d)
        hr = Hd @ rho
        out = -1j * (hr - hr.conj().T)
        for op, nn, half in ops:
            k = op @ rho @ op.conj().T
            nr = nn @ rho
            out += half * (2.0 * k - nr - nr.conj().T)
        return out.ravel()

    sol = solve_ivp(rhs, (0.0, t), r0.ravel(), method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    rho = sol.y[:, -1].reshape(d, d)
    drift = abs(np.trace(rho) - np.trace(r0))
    if drift > 1e-8:
        raise IntegrationError(f"trace drifted by {drift:.3g} during integration")
    return DensityMatrix(0.5 * (rho + rho.conj().T), dims)


@dataclass(frozen=True)
class QubitQnConfig:
    """Qubit reading of the reservoir parameters (same roles as the bosonic network)."""

    detunings_in: NDArray[np.float64]
    detunings_qn: NDArray[np.float64]
    couplings_in: NDArray[np.float64]
    couplings_qn: NDArray[np.float64]
    pumps: NDArray[np.float64]
    losses_in: NDArray[np.float64]
    losses_qn: NDArray[np.float64]
    gamma_scale: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("detunings_in", "detunings_qn", "couplings_in", "couplings_qn",
                     "pumps", "losses_in", "losses_qn"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        q = self.n_qubits
        if self.couplings_in.shape != (N_INPUTS, q) or self.couplings_qn.shape != (q, q):
            raise ValidationError("coupling matrices have inconsistent shapes")
        j = self.couplings_qn
        if not np.array_equal(j, j.T) or np.any(np.diag(j) != 0):
            raise ValidationError("node couplings must be symmetric with zero diagonal")
        if np.any(self.losses_in < 0) or np.any(self.losses_qn < 0):
            raise ValidationError("loss rates must be nonnegative")

    @property
    def n_qubits(self) -> int:
        return int(self.detunings_qn.size)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k).tolist() for k in (
            "detunings_in", "detunings_qn", "couplings_in", "couplings_qn",
            "pumps", "losses_in", "losses_qn")}
        out.update(gamma_scale=self.gamma_scale, seed=self.seed)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "QubitQnConfig":
        return cls(**data)


def sample_qubit_params(n_qubits: int, gamma_scale: float = 1.0, rng=None, seed=None) -> QubitQnConfig:
    """Same ranges as the bosonic network: rates on ``[0, 0.1]Γ``, the rest on ``[0, 1]Γ``."""
    if n_qubits < 1:
        raise ValidationError("a reservoir needs at least one qubit")
    rng = check_random_state(rng if rng is not None else seed)
    q, g = n_qubits, gamma_scale
    delta = rng.uniform(0, g, N_INPUTS)
    lam = rng.uniform(0, g, q)
    k = rng.uniform(0, g, (N_INPUTS, q))
    upper = np.triu(rng.uniform(0, g, (q, q)), 1)
    pumps = rng.uniform(0, g, q)
    losses_in = rng.uniform(0, 0.1 * g, N_INPUTS)
    losses_qn = rng.uniform(0, 0.1 * g, q)
    return QubitQnConfig(delta, lam, k, upper + upper.T, pumps, losses_in, losses_qn, g, seed)


def qubit_hamiltonian(config: QubitQnConfig) -> tuple[sp.csr_matrix, list]:
    """Sparse Hamiltonian and collapse terms of the joint input + reservoir register."""
    q = config.n_qubits
    n = N_INPUTS + q
    low = [_embed(SIGMA_MINUS, k, n) for k in range(n)]
    num = [(op.conj().T @ op).tocsr() for op in low]
    hop = lambda a, b: a @ b.conj().T + b @ a.conj().T  # noqa: E731
    H = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i in range(N_INPUTS):
        H = H + config.detunings_in[i] * num[i]
        for j in range(q):
            if config.couplings_in[i, j]:
                H = H + config.couplings_in[i, j] * hop(low[i], low[N_INPUTS + j])
    for j in range(q):
        b = low[N_INPUTS + j]
        H = H + config.detunings_qn[j] * num[N_INPUTS + j] + config.pumps[j] * (b + b.conj().T)
        for jj in range(j + 1, q):
            if config.couplings_qn[j, jj]:
                H = H + config.couplings_qn[j, jj] * hop(b, low[N_INPUTS + jj])
    rates = np.concatenate([config.losses_in, config.losses_qn])
    return H.tocsr(), list(zip(low, rates))


def _qn_observables(q: int, observable_set: str) -> list[NDArray]:
    n = N_INPUTS + q
    ops = []
    for j in range(q):
        site = N_INPUTS + j
        if observable_set == "pauli_triple":
            ops += [_embed(s, site, n) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
        else:
            ops.append(_embed(SIGMA_MINUS.conj().T @ SIGMA_MINUS, site, n))
    return ops


class QubitChannel:
    """
    Linear map from two-qubit input states to reservoir expectation values.

    The joint evolution is linear in ``ρ_in``, so the 16 matrix units
    ``|i><j| ⊗ |g...g><g...g|`` are propagated once with the exact sparse
    exponential of the Liouvillian and every later input is a contraction.
    """

    def __init__(self, config: QubitQnConfig, readout_times: Sequence[float],
                 observable_set: str = "pauli_triple", max_qubits: int = MAX_QUBITS):
        if observable_set not in OBSERVABLE_SETS:
            raise ValidationError(f"unknown observable set {observable_set!r}")
        q = config.n_qubits
        if q > max_qubits:
            raise CapacityError(
                f"{q} reservoir qubits need a {2 ** (N_INPUTS + q)}-dimensional register; "
                f"the memory budget allows at most {max_qubits}"
            )
        times = _check_times(readout_times)
        self.config = config
        self.times = times
        self.observable_set = observable_set
        H, collapse = qubit_hamiltonian(config)
        d = H.shape[0]
        dq = 2**q
        gen = _vectorized_lindbladian(H, collapse)
        # 16 input matrix units with the reservoir in |g...g>
        units = np.zeros((d * d, 16), dtype=complex)
        for a in range(4):
            for b in range(4):
                units[(a * dq) * d + b * dq, 4 * a + b] = 1.0
        obs = _qn_observables(q, observable_set)
        # tr(O ρ) = sum_ij O_ji ρ_ij = vec(Oᵀ)·vec(ρ)
        obs_rows = sp.vstack([sp.csr_matrix(o.T.reshape(1, d * d)) for o in obs]).tocsr()
        maps = []
        states = units
        t_prev = 0.0
        for t in times:
            states = expm_multiply(gen * (t - t_prev), states) if t > t_prev else states
            t_prev = t
            maps.append(obs_rows @ states)
        # (n_obs_total, 16): observable = maps @ vec(ρ_in)
        self.matrix = np.vstack(maps)
        kinds = ("sigma_x", "sigma_y", "sigma_z") if observable_set == "pauli_triple" else ("excitation",)
        self.labels = [(j, k, t) for t in times for j in range(q) for k in kinds]

    def __call__(self, rhos: NDArray) -> NDArray[np.float64]:
        flat = np.asarray(rhos, dtype=complex).reshape(-1, 16)
        return (flat @ self.matrix.T).real


def run_qubit_probe(
    config: QubitQnConfig,
    rho_in,
    readout_times: Sequence[float],
    observable_set: str = "pauli_triple",
    max_qubits: int = MAX_QUBITS,
) -> ObservableVector:
    """Couple a two-qubit input to the reservoir (initially in ``|g...g>``) and read it out."""
    rho = rho_in if isinstance(rho_in, DensityMatrix) else DensityMatrix(rho_in, (2, 2))
    if rho.dim != 4:
        raise ValidationError("input state must be a two-qubit density matrix")
    channel = QubitChannel(config, readout_times, observable_set, max_qubits)
    return ObservableVector(channel(rho.matrix)[0], channel.labels)


class QubitReservoir(TransformerMixin, BaseEstimator):
    """
    Transformer from two-qubit density matrices to qubit-reservoir observables.

    Readout times are ``tau * (1, ..., n_multiplex)`` with ``tau = π/(2Γ)`` by default.
    """

    def __init__(self, n_qubits=5, observables="pauli_triple", n_multiplex=1, tau=None,
                 gamma_scale=1.0, max_qubits=MAX_QUBITS, config=None, random_state=None):
        self.n_qubits = n_qubits
        self.observables = observables
        self.n_multiplex = n_multiplex
        self.tau = tau
        self.gamma_scale = gamma_scale
        self.max_qubits = max_qubits
        self.config = config
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.config is not None:
            self.config_ = self.config
        else:
            seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else None
            self.config_ = sample_qubit_params(self.n_qubits, self.gamma_scale,
                                               check_random_state(self.random_state), seed)
        tau = np.pi / (2 * self.config_.gamma_scale) if self.tau is None else self.tau
        self.readout_times_ = tau * np.arange(1, self.n_multiplex + 1)
        self.channel_ = QubitChannel(self.config_, self.readout_times_, self.observables, self.max_qubits)
        self.n_features_out_ = len(self.channel_.labels)
        return self

    def transform(self, X):
        if not hasattr(self, "channel_"):
            raise AttributeError("QubitReservoir is not fitted; call fit first")
        return self.channel_(check_dm_stack(X, dim=4))
