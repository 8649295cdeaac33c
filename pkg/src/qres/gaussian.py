"""
Gaussian-state toolkit for linear bosonic dynamics.

Quadratures are dimensionless with vacuum covariance ``0.5 * I``. Within a
covariance matrix each mode occupies two consecutive rows ``(x, p)``. For the
reservoir setups the input modes come first (``input_first`` ordering), which
is still interleaved per mode; the ordering tag only records the meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .exceptions import DivergenceError, ValidationError

VACUUM_VARIANCE = 0.5
PHYSICALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12
ORDERINGS = ("interleaved", "input_first")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric ``2N x 2N`` second-moment matrix of quadrature operators."""

    matrix: NDArray[np.float64]
    ordering: str = "interleaved"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValidationError(f"covariance matrix must be 2N x 2N, got shape {m.shape}")
        if self.ordering not in ORDERINGS:
            raise ValidationError(f"unknown ordering {self.ordering!r}")
        _check_symmetric(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def vacuum(cls, n_modes: int, ordering: str = "interleaved") -> "CovarianceMatrix":
        return cls(VACUUM_VARIANCE * np.eye(2 * n_modes), ordering)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class LinearDynamics:
    """Drift ``A``, diffusion ``D`` and constant drive ``h`` of ``du/dt = A u + h``."""

    drift: NDArray[np.float64]
    diffusion: NDArray[np.float64]
    drive: NDArray[np.float64] = field(default=None)

    def __post_init__(self):
        a = np.array(self.drift, dtype=float)
        d = np.array(self.diffusion, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n) or d.shape != (n, n):
            raise ValidationError(
                f"drift {a.shape} and diffusion {d.shape} must be matching square matrices"
            )
        h = np.zeros(n) if self.drive is None else np.array(self.drive, dtype=float).ravel()
        if h.shape != (n,):
            raise ValidationError(f"drive has length {h.size}, expected {n}")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12 * max(1.0, np.abs(d).max())):
            raise ValidationError("diffusion matrix must be symmetric")
        if n and np.linalg.eigvalsh(d).min() < -1e-12 * max(1.0, np.abs(d).max()):
            raise ValidationError("diffusion matrix must be positive semidefinite")
        for arr in (a, d, h):
            arr.setflags(write=False)
        object.__setattr__(self, "drift", a)
        object.__setattr__(self, "diffusion", d)
        object.__setattr__(self, "drive", h)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]


class PhysicalityCheck(NamedTuple):
    physical: bool
    min_symplectic_eigenvalue: float

    def __bool__(self):
        return bool(self.physical)


def _as_matrix(V) -> NDArray[np.float64]:
    if isinstance(V, CovarianceMatrix):
        return V.matrix
    return np.asarray(V, dtype=float)


def _check_symmetric(m: NDArray) -> None:
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    if np.abs(m - m.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValidationError("covariance matrix is not symmetric")


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form with one ``[[0, 1], [-1, 0]]`` block per mode."""
    if n_modes < 1:
        raise ValidationError("n_modes must be a positive integer")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _spectrum(m: NDArray) -> NDArray:
    # Works on stacks (..., 2N, 2N); no validation.
    n = m.shape[-1] // 2
    omega = symplectic_form(n)
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * omega @ m)), axis=-1)
    return moduli[..., 1::2]


def symplectic_eigenvalues(V, validate: bool = True) -> NDArray[np.float64]:
    """
    Symplectic spectrum of a covariance matrix in ascending order.

    Moduli of the ``2N`` eigenvalues of ``i Ω V`` come in pairs; they are
    sorted and every second value is kept so that numerical splitting of a
    pair does not matter.
    """
    m = _as_matrix(V)
    if validate:
        _check_symmetric(m)
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValidationError("covariance matrix is not positive definite") from None
    return _spectrum(m)


def is_physical(V) -> PhysicalityCheck:
    """Uncertainty-principle check ``V + i Ω / 2 >= 0`` via the symplectic spectrum."""
    m = _as_matrix(V)
    eigs = np.linalg.eigvalsh(m)
    if eigs.min() <= 0:
        # Not positive definite: the symplectic spectrum is meaningless, report the
        # most negative ordinary eigenvalue instead.
        return PhysicalityCheck(False, float(eigs.min()))
    nu = float(_spectrum(m).min())
    return PhysicalityCheck(nu >= VACUUM_VARIANCE - PHYSICALITY_TOL, nu)


def _momentum_flip(n_modes: int, party_b: Sequence[int]) -> NDArray:
    signs = np.ones(2 * n_modes)
    for mode in party_b:
        signs[2 * mode + 1] = -1.0
    return signs


def _resolve_partition(n_modes: int, partition) -> tuple[list[int], list[int]]:
    if partition is None:
        if n_modes % 2:
            raise ValidationError("default partition needs an even number of modes")
        half = n_modes // 2
        return list(range(half)), list(range(half, n_modes))
    if len(partition) == 2 and not np.isscalar(partition[0]):
        party_a, party_b = (list(p) for p in partition)
    else:
        party_a = list(partition)
        party_b = [k for k in range(n_modes) if k not in party_a]
    if sorted(party_a + party_b) != list(range(n_modes)):
        raise ValidationError(f"partition {partition!r} does not cover {n_modes} modes exactly once")
    if not party_a or not party_b:
        raise ValidationError("both parties of the bipartition must be nonempty")
    return party_a, party_b


def partial_transpose(V, partition=None) -> NDArray[np.float64]:
    """Covariance matrix after time reversal (``p -> -p``) of the second party."""
    m = _as_matrix(V)
    n = m.shape[-1] // 2
    _, party_b = _resolve_partition(n, partition)
    s = _momentum_flip(n, party_b)
    return m * s[:, None] * s[None, :]


def log_negativity(V, partition=None, validate: bool = True) -> float:
    """
    Logarithmic negativity ``max(0, -ln(2 ν̃₋))`` across a mode bipartition.

    Parameters
    ----------
    V : CovarianceMatrix or array_like
        Covariance matrix.
    partition : sequence, optional
        Either the modes of the first party or a pair ``(party_a, party_b)``.
        Defaults to an even split (``1|1`` for two modes).
    validate : bool
        Raise :class:`ValidationError` when ``V`` is unphysical. Reconstructed
        estimates pass ``False`` to get the value of the formula regardless.
    """
    m = _as_matrix(V)
    if validate:
        _check_symmetric(m)
        check = is_physical(m)
        if not check:
            raise ValidationError(
                "unphysical covariance matrix: minimum symplectic eigenvalue "
                f"{check.min_symplectic_eigenvalue:.6g} < 0.5"
            )
    else:
        m = 0.5 * (m + m.T)
    nu = _spectrum(partial_transpose(m, partition)).min()
    return float(max(0.0, -np.log(2.0 * nu))) + 0.0


def log_negativity_batch(Vs: ArrayLike, partition=None) -> NDArray[np.float64]:
    """Unvalidated logarithmic negativity of a stack of covariance matrices."""
    m = np.asarray(Vs, dtype=float)
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    nu = _spectrum(partial_transpose(m, partition)).min(axis=-1)
    return np.maximum(0.0, -np.log(2.0 * nu)) + 0.0


def two_mode_squeezed_vacuum(r: float) -> NDArray[np.float64]:
    c, s = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    z = np.diag([1.0, -1.0])
    return np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])


def _van_loan(dyn: LinearDynamics, t: float):
    a, d, h = dyn.drift, dyn.diffusion, dyn.drive
    n = dyn.dim
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -a
    block[:n, n:] = d
    block[n:, n:] = a.T
    f = expm(block * t)
    phi = f[n:, n:].T
    noise = phi @ f[:n, n:]
    noise = 0.5 * (noise + noise.T)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = a
    aug[:n, n] = h
    shift = expm(aug * t)[:n, n]
    return phi, noise, shift


class GaussianPropagator:
    """
    Exact finite-time map of a linear Gaussian channel.

    ``V(t) = Φ V0 Φᵀ + Q`` and ``u(t) = Φ u0 + s`` with ``Φ = exp(A t)``; both
    ``Q`` and ``s`` come from block matrix exponentials, so the propagator can be
    applied to many initial states at the cost of two matrix products each.
    """

    def __init__(self, dyn: LinearDynamics, t: float):
        if t < 0:
            raise ValidationError("evolution time must be nonnegative")
        self.dyn = dyn
        self.t = float(t)
        self.phi, self.noise, self.shift = _van_loan(dyn, self.t)

    def covariance(self, V0: ArrayLike) -> NDArray[np.float64]:
        v = np.asarray(V0, dtype=float)
        out = self.phi @ v @ self.phi.T + self.noise
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def mean(self, u0: ArrayLike) -> NDArray[np.float64]:
        return self.phi @ np.asarray(u0, dtype=float) + self.shift


def evolve_gaussian(
    dyn: LinearDynamics,
    V0,
    u0: ArrayLike | None,
    t: float,
    method: str = "ode",
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> tuple[CovarianceMatrix, NDArray[np.float64]]:
    """
    Propagate covariance matrix and first moments under linear Langevin dynamics.

    ``method="ode"`` integrates ``dV/dt = A V + V Aᵀ + D`` with an adaptive
    Runge-Kutta 4(5) scheme; ``method="expm"`` uses the closed form.
    """
    v0 = _as_matrix(V0)
    ordering = V0.ordering if isinstance(V0, CovarianceMatrix) else "interleaved"
    n = dyn.dim
    u0 = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float).ravel()
    if v0.shape != (n, n) or u0.shape != (n,):
        raise ValidationError(f"state dimensions {v0.shape}, {u0.shape} do not match dynamics of size {n}")
    if t < 0:
        raise ValidationError("evolution time must be nonnegative")
    if t == 0:
        return CovarianceMatrix(v0, ordering), u0.copy()

    if method == "expm":
        prop = GaussianPropagator(dyn, t)
        v, u = prop.covariance(v0), prop.mean(u0)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(u))):
            raise DivergenceError(f"closed-form propagation diverged at t={t:g}", time=t)
        return CovarianceMatrix(v, ordering), u
    if method != "ode":
        raise ValidationError(f"unknown method {method!r}")

    a, d, h = dyn.drift, dyn.diffusion, dyn.drive

    def rhs(_, y):
        v = y[: n * n].reshape(n, n)
        av = a @ v
        dv = av + av.T + d
        return np.concatenate([dv.ravel(), a @ y[n * n :] + h])

    y0 = np.concatenate([v0.ravel(), u0])
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(rhs, (0.0, t), y0, method="RK45", rtol=rtol, atol=atol)
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        bad = np.flatnonzero(~np.all(np.isfinite(sol.y), axis=0))
        t_bad = sol.t[bad[0]] if bad.size else sol.t[-1]
        raise DivergenceError(
            f"Lyapunov integration diverged at time step t={t_bad:.6g} ({sol.message})", time=t_bad
        )
    y = sol.y[:, -1]
    v = y[: n * n].reshape(n, n)
    return CovarianceMatrix(0.5 * (v + v.T), ordering), y[n * n :]
