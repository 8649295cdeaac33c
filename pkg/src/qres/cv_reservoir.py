"""
Continuous-variable reservoir: randomly coupled bosonic nodes probed by inputs.

The joint system holds two input modes followed by ``M`` reservoir nodes, all
interleaved as ``(q1, r1, q2, r2, x1, p1, ..., xM, pM)``. Frequencies are in
units of the overall scale ``gamma_scale``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import block_diag
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_cm_stack, check_random_state
from .exceptions import ValidationError
from .gaussian import GaussianPropagator, LinearDynamics, is_physical

N_INPUTS = 2
VARIANTS = ("standard", "two_photon_pump", "ultra_strong")
TOPOLOGIES = ("all_to_all", "chain")
OBSERVABLE_SETS = ("local_cm_triple", "mean_excitation")


@dataclass(frozen=True)
class ReservoirConfig:
    """One random realization of the reservoir network and its coupling to the inputs."""

    detunings_in: NDArray[np.float64]
    detunings_qn: NDArray[np.float64]
    couplings_in: NDArray[np.float64]
    couplings_qn: NDArray[np.float64]
    pumps: NDArray[np.float64]
    two_photon_pumps: NDArray[np.float64]
    losses_in: NDArray[np.float64]
    losses_qn: NDArray[np.float64]
    variant: str = "standard"
    topology: str = "all_to_all"
    gamma_scale: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        for name in (
            "detunings_in", "detunings_qn", "couplings_in", "couplings_qn",
            "pumps", "two_photon_pumps", "losses_in", "losses_qn",
        ):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        m = self.n_nodes
        expected = {
            "detunings_in": (N_INPUTS,), "losses_in": (N_INPUTS,),
            "detunings_qn": (m,), "pumps": (m,), "two_photon_pumps": (m,), "losses_qn": (m,),
            "couplings_in": (N_INPUTS, m), "couplings_qn": (m, m),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValidationError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.topology not in TOPOLOGIES:
            raise ValidationError(f"unknown topology {self.topology!r}")
        if np.any(self.losses_in < 0) or np.any(self.losses_qn < 0):
            raise ValidationError("loss rates must be nonnegative")
        j = self.couplings_qn
        if not np.array_equal(j, j.T) or np.any(np.diag(j) != 0):
            raise ValidationError("node couplings must be symmetric with zero diagonal")
        if self.variant != "two_photon_pump" and np.any(self.two_photon_pumps != 0):
            raise ValidationError("two-photon pumps are only allowed for the two_photon_pump variant")

    @property
    def n_nodes(self) -> int:
        return int(np.asarray(self.detunings_qn).size)

    def to_dict(self) -> dict:
        out = {}
        for key in (
            "detunings_in", "detunings_qn", "couplings_in", "couplings_qn",
            "pumps", "two_photon_pumps", "losses_in", "losses_qn",
        ):
            out[key] = getattr(self, key).tolist()
        out.update(variant=self.variant, topology=self.topology,
                   gamma_scale=self.gamma_scale, seed=self.seed, n_nodes=self.n_nodes)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ReservoirConfig":
        data = dict(data)
        data.pop("n_nodes", None)
        return cls(**data)


@dataclass(frozen=True)
class ObservableVector:
    """Recorded reservoir observables with ``(node, kind, time)`` labels."""

    values: NDArray[np.float64]
    labels: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        labels = tuple(tuple(lab) for lab in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) != values.size:
            raise ValidationError(f"{values.size} values but {len(labels)} labels")
        times = [lab[2] for lab in labels]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValidationError("observable readout times must be nondecreasing")

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values) -> "ObservableVector":
        return ObservableVector(values, self.labels)


def _topology_mask(m: int, topology: str) -> NDArray:
    if topology == "all_to_all":
        return 1.0 - np.eye(m)
    mask = np.zeros((m, m))
    idx = np.arange(m - 1)
    mask[idx, idx + 1] = mask[idx + 1, idx] = 1.0
    return mask


def sample_qn_params(
    n_nodes: int,
    gamma_scale: float = 1.0,
    variant: str = "standard",
    rng=None,
    topology: str = "all_to_all",
    seed: int | None = None,
) -> ReservoirConfig:
    """
    Draw a reservoir realization.

    Detunings, couplings and pumps are uniform on ``[0, 1]Γ``; loss rates and
    (for ``two_photon_pump``) two-photon pumps are uniform on ``[0, 0.1]Γ``.
    """
    if n_nodes < 1:
        raise ValidationError("a reservoir needs at least one node")
    if gamma_scale <= 0:
        raise ValidationError("gamma_scale must be positive")
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    rng = check_random_state(rng if rng is not None else seed)
    m, g = n_nodes, gamma_scale
    delta = rng.uniform(0, g, N_INPUTS)
    lam = rng.uniform(0, g, m)
    k = rng.uniform(0, g, (N_INPUTS, m))
    upper = np.triu(rng.uniform(0, g, (m, m)), 1)
    j = (upper + upper.T) * _topology_mask(m, topology)
    pumps = rng.uniform(0, g, m)
    losses_in = rng.uniform(0, 0.1 * g, N_INPUTS)
    losses_qn = rng.uniform(0, 0.1 * g, m)
    if variant == "two_photon_pump":
        pumps2 = rng.uniform(0, 0.1 * g, m)
    else:
        pumps2 = np.zeros(m)
    return ReservoirConfig(
        detunings_in=delta, detunings_qn=lam, couplings_in=k, couplings_qn=j,
        pumps=pumps, two_photon_pumps=pumps2, losses_in=losses_in, losses_qn=losses_qn,
        variant=variant, topology=topology, gamma_scale=g, seed=seed,
    )


def build_dynamics(config: ReservoirConfig) -> LinearDynamics:
    """Drift, diffusion and pump drive of the joint input + reservoir system."""
    m = config.n_nodes
    n = 2 * (N_INPUTS + m)
    a = np.zeros((n, n))
    q = lambda i: 2 * i  # noqa: E731
    r = lambda i: 2 * i + 1  # noqa: E731
    x = lambda j: 2 * (N_INPUTS + j)  # noqa: E731
    p = lambda j: 2 * (N_INPUTS + j) + 1  # noqa: E731

    for i in range(N_INPUTS):
        g, d = config.losses_in[i], config.detunings_in[i]
        a[q(i), q(i)] = a[r(i), r(i)] = -g
        a[q(i), r(i)] = d
        a[r(i), q(i)] = -d
        for j in range(m):
            k = config.couplings_in[i, j]
            a[q(i), p(j)] = k
            a[r(i), x(j)] = -k
            a[x(j), r(i)] = k
            a[p(j), q(i)] = -k

    for j in range(m):
        kap, lam = config.losses_qn[j], config.detunings_qn[j]
        a[x(j), x(j)] = a[p(j), p(j)] = -kap
        a[x(j), p(j)] = lam
        a[p(j), x(j)] = -lam
        for jj in range(m):
            cpl = config.couplings_qn[j, jj]
            if jj == j or cpl == 0:
                continue
            if config.variant == "ultra_strong":
                # 2 J x_j x_jj only pushes momenta
                a[p(j), x(jj)] = -2.0 * cpl
            else:
                a[x(j), p(jj)] = cpl
                a[p(j), x(jj)] = -cpl
        if config.variant == "two_photon_pump":
            s = config.two_photon_pumps[j]
            a[x(j), p(j)] -= 2.0 * s
            a[p(j), x(j)] -= 2.0 * s

    rates = np.concatenate([config.losses_in, config.losses_qn])
    diffusion = np.diag(np.repeat(rates, 2))
    drive = np.zeros(n)
    drive[[p(j) for j in range(m)]] = -np.sqrt(2.0) * config.pumps
    return LinearDynamics(a, diffusion, drive)


def default_tau(gamma_scale: float = 1.0) -> float:
    return np.pi / (2.0 * gamma_scale)


def _local_observables(v, u, m: int, observable_set: str) -> NDArray:
    # v: (..., n, n) joint covariance, u: (n,) joint mean.
    idx = 2 * N_INPUTS + 2 * np.arange(m)
    vxx = v[..., idx, idx]
    vpp = v[..., idx + 1, idx + 1]
    if observable_set == "local_cm_triple":
        vxp = v[..., idx, idx + 1]
        return np.stack([vxx, vpp, vxp], axis=-1).reshape(*v.shape[:-2], 3 * m)
    mean_sq = u[idx] ** 2 + u[idx + 1] ** 2
    return (vxx + vpp - 1.0) / 2.0 + mean_sq / 2.0


def _labels(m: int, times: Sequence[float], observable_set: str) -> list:
    kinds = ("var_x", "var_p", "cov_xp") if observable_set == "local_cm_triple" else ("excitation",)
    return [(node, kind, float(t)) for t in times for node in range(m) for kind in kinds]


def _check_times(readout_times) -> list[float]:
    times = [float(t) for t in np.atleast_1d(readout_times)]
    if not times or any(t <= 0 for t in times):
        raise ValidationError("readout_times must be a nonempty list of positive durations")
    return times


def run_probe(
    config: ReservoirConfig,
    V_in,
    readout_times: Sequence[float],
    observable_set: str = "local_cm_triple",
) -> ObservableVector:
    """Let a two-mode input interact with the reservoir and record node observables."""
    if observable_set not in OBSERVABLE_SETS:
        raise ValidationError(f"unknown observable set {observable_set!r}")
    v_in = np.asarray(getattr(V_in, "matrix", V_in), dtype=float)
    if v_in.shape != (4, 4):
        raise ValidationError("input covariance matrix must describe two modes")
    check = is_physical(v_in)
    if not check:
        raise ValidationError(
            f"unphysical input covariance matrix (min symplectic eigenvalue {check.min_symplectic_eigenvalue:.6g})"
        )
    times = _check_times(readout_times)
    m = config.n_nodes
    dyn = build_dynamics(config)
    v0 = block_diag(v_in, 0.5 * np.eye(2 * m))
    u0 = np.zeros(dyn.dim)
    values = []
    for t in times:
        prop = GaussianPropagator(dyn, t)
        values.append(_local_observables(prop.covariance(v0), prop.mean(u0), m, observable_set))
    return ObservableVector(np.concatenate(values), _labels(m, times, observable_set))


class CVReservoir(TransformerMixin, BaseEstimator):
    """
    Map two-mode input covariance matrices to reservoir observables.

    ``fit`` draws a reservoir realization from ``random_state`` (or adopts
    ``config`` verbatim); ``transform`` takes a stack of ``4 x 4`` covariance
    matrices and returns an ``(n_samples, n_observables)`` array. The readout
    times are ``tau * (1, ..., n_multiplex)``.

    Parameters
    ----------
    n_nodes : int
    variant : {"standard", "two_photon_pump", "ultra_strong"}
    observables : {"local_cm_triple", "mean_excitation"}
    n_multiplex : int
        Number of readout times.
    tau : float, optional
        Base readout time, ``π / (2Γ)`` by default.
    gamma_scale : float
    topology : {"all_to_all", "chain"}
    config : ReservoirConfig, optional
        Fixed realization; skips sampling.
    random_state : int, Generator or None
    """

    def __init__(
        self,
        n_nodes=4,
        variant="standard",
        observables="local_cm_triple",
        n_multiplex=1,
        tau=None,
        gamma_scale=1.0,
        topology="all_to_all",
        config=None,
        random_state=None,
    ):
        self.n_nodes = n_nodes
        self.variant = variant
        self.observables = observables
        self.n_multiplex = n_multiplex
        self.tau = tau
        self.gamma_scale = gamma_scale
        self.topology = topology
        self.config = config
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.observables not in OBSERVABLE_SETS:
            raise ValidationError(f"unknown observable set {self.observables!r}")
        if self.n_multiplex < 1:
            raise ValidationError("n_multiplex must be at least 1")
        if self.config is not None:
            self.config_ = self.config
        else:
            seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else None
            self.config_ = sample_qn_params(
                self.n_nodes, self.gamma_scale, self.variant,
                check_random_state(self.random_state), self.topology, seed=seed,
            )
        tau = default_tau(self.config_.gamma_scale) if self.tau is None else self.tau
        self.readout_times_ = tau * np.arange(1, self.n_multiplex + 1)
        dyn = build_dynamics(self.config_)
        self.propagators_ = [GaussianPropagator(dyn, t) for t in self.readout_times_]
        m = self.config_.n_nodes
        self.labels_ = _labels(m, self.readout_times_, self.observables)
        self.n_features_out_ = len(self.labels_)
        return self

    def transform(self, X):
        if not hasattr(self, "propagators_"):
            raise AttributeError("CVReservoir is not fitted; call fit first")
        v_in = check_cm_stack(X, n_modes=2)
        m = self.config_.n_nodes
        n = 2 * (N_INPUTS + m)
        v0 = np.zeros((v_in.shape[0], n, n))
        v0[:, :4, :4] = v_in
        v0[:, 4:, 4:] = 0.5 * np.eye(2 * m)
        u0 = np.zeros(n)
        out = [
            _local_observables(prop.covariance(v0), prop.mean(u0), m, self.observables)
            for prop in self.propagators_
        ]
        return np.concatenate(out, axis=-1)

    def get_feature_names_out(self, input_features=None):
        return np.array([f"node{n}_{k}_t{t:.6g}" for n, k, t in self.labels_], dtype=object)
