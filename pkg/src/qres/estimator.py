"""
Linear readout training and entanglement estimation.

A readout maps a row of reservoir observables ``v`` to the unique elements of
the input state through ``f_s = β_s · [1, v]``. Covariance-matrix targets are
the 10 upper-triangle entries of a two-mode CM; qubit targets are the 15
generalized Bloch components ``tr(ρ σ_i ⊗ σ_j)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin

from ._validation import check_cm_stack, check_dm_stack, check_observables, check_random_state
from .cv_reservoir import ObservableVector
from .exceptions import RankDeficiencyWarning, ValidationError
from .gaussian import is_physical, log_negativity_batch
from .qubit import PAULIS, negativity_batch

DEFAULT_LAMBDA = 0.0
LAMBDA_GRID = tuple(10.0 ** np.arange(-6, 0))
KINDS = ("cv", "qubit")

_CV_IU = np.triu_indices(4)
_PAULI_PAIRS = [(i, j) for i in range(4) for j in range(4) if (i, j) != (0, 0)]
_PAULI_BASIS = np.stack([np.kron(PAULIS[i], PAULIS[j]) for i, j in _PAULI_PAIRS])


def target_layout(kind: str) -> list[str]:
    if kind == "cv":
        return [f"V[{i},{j}]" for i, j in zip(*_CV_IU)]
    if kind == "qubit":
        names = "Ixyz"
        return [f"r[{names[i]}{names[j]}]" for i, j in _PAULI_PAIRS]
    raise ValidationError(f"unknown state kind {kind!r}")


def state_to_targets(states, kind: str) -> NDArray[np.float64]:
    """Unique real parameters of each state, one row per state."""
    if kind == "cv":
        v = check_cm_stack(states, n_modes=2)
        return v[:, _CV_IU[0], _CV_IU[1]]
    if kind == "qubit":
        rho = check_dm_stack(states, dim=4)
        return np.einsum("kji,nij->nk", _PAULI_BASIS, rho).real
    raise ValidationError(f"unknown state kind {kind!r}")


def targets_to_state(targets: ArrayLike, kind: str) -> NDArray:
    """Assemble symmetric CMs or Hermitian unit-trace matrices from target rows."""
    t = np.atleast_2d(np.asarray(targets, dtype=float))
    if kind == "cv":
        if t.shape[1] != 10:
            raise ValidationError("covariance targets need 10 entries")
        v = np.zeros((t.shape[0], 4, 4))
        v[:, _CV_IU[0], _CV_IU[1]] = t
        v[:, _CV_IU[1], _CV_IU[0]] = t
        return v
    if kind == "qubit":
        if t.shape[1] != 15:
            raise ValidationError("qubit targets need 15 entries")
        rho = np.eye(4, dtype=complex)[None] + np.einsum("nk,kij->nij", t.astype(complex), _PAULI_BASIS)
        return rho / 4.0
    raise ValidationError(f"unknown state kind {kind!r}")


def entanglement_of(states: NDArray, kind: str) -> NDArray[np.float64]:
    """Logarithmic negativity (CV) or negativity (qubit) without physicality checks."""
    if kind == "cv":
        return log_negativity_batch(states)
    return negativity_batch(states)


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian measurement error with standard deviation ``zeta / 2``."""

    zeta: float = 0.0
    mode: str = "per_evaluation"

    def __post_init__(self):
        if self.zeta < 0:
            raise ValidationError("zeta must be nonnegative")
        if self.mode != "per_evaluation":
            raise ValidationError(f"unsupported noise mode {self.mode!r}")

    @property
    def std(self) -> float:
        return self.zeta / 2.0


def add_measurement_noise(v, noise: NoiseModel, rng=None):
    """Perturb every observable by an independent fresh Gaussian draw."""
    if isinstance(v, ObservableVector):
        return v.with_values(add_measurement_noise(v.values, noise, rng))
    arr = np.asarray(v, dtype=float)
    if noise.zeta == 0:
        return arr.copy()
    rng = check_random_state(rng)
    return arr + rng.normal(0.0, noise.std, arr.shape)


@dataclass(frozen=True)
class TrainedReadout:
    """Ridge coefficients, one row ``[β0, β1, ..., β_Nob]`` per target element."""

    betas: NDArray[np.float64]
    target_layout: tuple
    ridge_lambda: float
    n_observables: int
    rank_deficient: bool = False
    lineage: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.array(self.betas, dtype=float)
        if b.ndim != 2 or b.shape[0] != len(self.target_layout):
            raise ValidationError("betas need one row per target element")
        if b.shape[1] != self.n_observables + 1:
            raise ValidationError("betas need n_observables + 1 columns")
        if not np.all(np.isfinite(b)):
            raise ValidationError("betas contain non-finite values")
        b.setflags(write=False)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "target_layout", tuple(self.target_layout))

    def predict(self, observables: ArrayLike) -> NDArray[np.float64]:
        x = check_observables(observables, self.n_observables)
        return x @ self.betas[:, 1:].T + self.betas[:, 0]

    def to_dict(self) -> dict:
        return {
            "target_layout": list(self.target_layout),
            "ridge_lambda": self.ridge_lambda,
            "n_observables": self.n_observables,
            "rank_deficient": self.rank_deficient,
            "lineage": self.lineage,
            "betas": self.betas.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedReadout":
        return cls(
            betas=np.array(data["betas"], dtype=float),
            target_layout=tuple(data["target_layout"]),
            ridge_lambda=float(data["ridge_lambda"]),
            n_observables=int(data["n_observables"]),
            rank_deficient=bool(data.get("rank_deficient", False)),
            lineage=dict(data.get("lineage", {})),
        )


def design_matrix(observables: ArrayLike) -> NDArray[np.float64]:
    x = check_observables(observables)
    return np.hstack([np.ones((x.shape[0], 1)), x])


def ridge_fit(X: ArrayLike, Y: ArrayLike, lam: float = DEFAULT_LAMBDA, layout: Sequence[str] | None = None) -> TrainedReadout:
    """
    Closed-form ridge regression ``β = (XᵀX + λI)⁻¹ XᵀY``.

    ``X`` already carries the leading column of ones; the penalty acts on all
    coefficients including the intercept. The system is solved as the stacked
    least-squares problem ``[X; √λ I] β = [Y; 0]`` (SVD based) instead of
    forming the inverse. With ``λ = 0`` and a singular ``XᵀX`` the
    minimum-norm solution is returned and a :class:`RankDeficiencyWarning` is
    emitted.
    """
    x = np.asarray(X, dtype=float)
    y = np.asarray(Y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or y.shape[0] != x.shape[0]:
        raise ValidationError(f"incompatible shapes X{x.shape}, Y{y.shape}")
    if lam < 0:
        raise ValidationError("ridge parameter must be nonnegative")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("training data contain non-finite values")
    p = x.shape[1]
    rank_deficient = False
    if lam > 0:
        xa = np.vstack([x, np.sqrt(lam) * np.eye(p)])
        ya = np.vstack([y, np.zeros((p, y.shape[1]))])
        beta = np.linalg.lstsq(xa, ya, rcond=None)[0]
    else:
        beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < p:
            rank_deficient = True
            warnings.warn(
                f"XᵀX has rank {rank} < {p}; returning the minimum-norm solution",
                RankDeficiencyWarning, stacklevel=2,
            )
    layout = tuple(layout) if layout is not None else tuple(f"y{k}" for k in range(y.shape[1]))
    return TrainedReadout(beta.T, layout, float(lam), p - 1, rank_deficient)


class Reconstruction(NamedTuple):
    state: NDArray
    entanglement: float
    physical: bool


def reconstruct_and_score(readout: TrainedReadout, v, kind: str) -> Reconstruction:
    """Estimate the input state from one observable vector and compute its entanglement."""
    values = np.asarray(getattr(v, "values", v), dtype=float).ravel()
    if values.size != readout.n_observables:
        raise ValidationError(f"expected {readout.n_observables} observables, got {values.size}")
    state = targets_to_state(readout.predict(values), kind)[0]
    ent = float(entanglement_of(state[None], kind)[0])
    if kind == "cv":
        physical = bool(is_physical(state))
    else:
        physical = bool(np.linalg.eigvalsh(state).min() >= -1e-9)
    return Reconstruction(state, ent, physical)


def estimation_error(E_est: ArrayLike, E_in: ArrayLike) -> float:
    """Root-mean-square deviation between estimated and true entanglement."""
    est = np.asarray(E_est, dtype=float).ravel()
    true = np.asarray(E_in, dtype=float).ravel()
    if est.size == 0:
        raise ValidationError("estimation_error needs at least one sample")
    if est.shape != true.shape:
        raise ValidationError(f"length mismatch: {est.size} estimates vs {true.size} true values")
    return float(np.sqrt(np.mean((est - true) ** 2)))


def std_estimation_error(E_est: ArrayLike, E_in: float) -> float:
    """Sample standard deviation of estimates around a fixed true value (``N - 1`` denominator)."""
    est = np.asarray(E_est, dtype=float).ravel()
    if est.size == 0:
        raise ValidationError("std_estimation_error needs at least one sample")
    if est.size < 2:
        raise ValidationError("std_estimation_error needs at least two samples")
    return float(np.sqrt(np.sum((est - float(E_in)) ** 2) / (est.size - 1)))


class ScalingFit(NamedTuple):
    slope: float
    stderr: float
    intercept: float
    ci_low: float
    ci_high: float


def fit_error_scaling(points: Sequence[tuple[float, float]], confidence: float = 0.95) -> ScalingFit:
    """Least-squares slope of ``log(error)`` against ``log(N)`` with its standard error."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValidationError("need at least three (N, error) points")
    if np.any(pts <= 0):
        raise ValidationError("scaling fit needs positive N and error values")
    res = stats.linregress(np.log(pts[:, 0]), np.log(pts[:, 1]))
    half = stats.t.ppf(0.5 + confidence / 2, pts.shape[0] - 2) * res.stderr
    return ScalingFit(float(res.slope), float(res.stderr), float(res.intercept),
                      float(res.slope - half), float(res.slope + half))


class MeasurementNoise(TransformerMixin, BaseEstimator):
    """Add fresh ``N(0, (zeta/2)²)`` noise to observables on every ``transform`` call."""

    def __init__(self, zeta=0.0, random_state=None):
        self.zeta = zeta
        self.random_state = random_state

    def fit(self, X=None, y=None):
        self.noise_ = NoiseModel(self.zeta)
        self.rng_ = check_random_state(self.random_state)
        return self

    def transform(self, X):
        if not hasattr(self, "rng_"):
            raise AttributeError("MeasurementNoise is not fitted; call fit first")
        return add_measurement_noise(check_observables(X), self.noise_, self.rng_)


class RidgeReadout(RegressorMixin, BaseEstimator):
    """Ridge regression with an explicit (penalized) intercept column."""

    def __init__(self, alpha=DEFAULT_LAMBDA):
        self.alpha = alpha

    def fit(self, X, y):
        x = check_observables(X)
        self.readout_ = ridge_fit(design_matrix(x), y, self.alpha)
        self.n_features_in_ = x.shape[1]
        return self

    def predict(self, X):
        out = self.readout_.predict(X)
        return out[:, 0] if out.shape[1] == 1 else out


def select_lambda(x: NDArray, y: NDArray, grid: Sequence[float], validation_fraction: float, rng) -> float:
    """Pick the ridge parameter with the smallest held-out target MSE."""
    n = x.shape[0]
    n_val = max(1, int(round(validation_fraction * n)))
    if n - n_val < 1:
        raise ValidationError("training set too small for a validation split")
    order = rng.permutation(n)
    val, tr = order[:n_val], order[n_val:]
    xd_tr, xd_val = design_matrix(x[tr]), design_matrix(x[val])
    scores = []
    for lam in grid:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankDeficiencyWarning)
            fit = ridge_fit(xd_tr, y[tr], lam)
        scores.append(np.mean((xd_val @ fit.betas.T - y[val]) ** 2))
    return float(grid[int(np.argmin(scores))])


class EntanglementEstimator(RegressorMixin, BaseEstimator):
    """
    Ridge readout that reconstructs input states and reports their entanglement.

    ``fit(observables, states)`` trains one coefficient row per unique state
    element; ``predict`` returns entanglement estimates and ``reconstruct``
    the estimated states. In a :class:`sklearn.pipeline.Pipeline` after a
    reservoir transformer, pass the input states as both ``X`` and ``y``.

    Parameters
    ----------
    kind : {"cv", "qubit"}
    ridge_lambda : float or "auto"
        ``"auto"`` picks from ``lambda_grid`` on a held-out split of the
        training rows and refits on all of them.
    lambda_grid : sequence of float
    validation_fraction : float
    random_state : int, Generator or None
        Controls the validation split.
    """

    def __init__(self, kind="cv", ridge_lambda=DEFAULT_LAMBDA, lambda_grid=LAMBDA_GRID,
                 validation_fraction=0.2, random_state=None):
        self.kind = kind
        self.ridge_lambda = ridge_lambda
        self.lambda_grid = lambda_grid
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def fit(self, X, y):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown state kind {self.kind!r}")
        x = check_observables(X)
        targets = state_to_targets(y, self.kind)
        if targets.shape[0] != x.shape[0]:
            raise ValidationError(f"{x.shape[0]} observable rows but {targets.shape[0]} states")
        if self.ridge_lambda == "auto":
            lam = select_lambda(x, targets, self.lambda_grid, self.validation_fraction,
                                check_random_state(self.random_state))
        else:
            lam = float(self.ridge_lambda)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RankDeficiencyWarning)
            self.readout_ = ridge_fit(design_matrix(x), targets, lam, target_layout(self.kind))
        for w in caught:
            warnings.warn(w.message, w.category, stacklevel=2)
        self.ridge_lambda_ = lam
        self.n_features_in_ = x.shape[1]
        return self

    def reconstruct(self, X) -> NDArray:
        if not hasattr(self, "readout_"):
            raise AttributeError("EntanglementEstimator is not fitted; call fit first")
        return targets_to_state(self.readout_.predict(X), self.kind)

    def predict(self, X) -> NDArray[np.float64]:
        return entanglement_of(self.reconstruct(X), self.kind)

    def score(self, X, y, sample_weight=None):
        """Negative RMS entanglement error against the true states ``y``."""
        true = entanglement_of(
            check_cm_stack(y, 2) if self.kind == "cv" else check_dm_stack(y, 4), self.kind
        )
        return -estimation_error(self.predict(X), true)
