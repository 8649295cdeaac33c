"""
Gravity-induced entanglement between two trapped masses, read out through cavities.

Mass quadratures are dimensionless (``x̂ = x √(mω/ħ)``, ``p̂ = p / √(ħmω)``).
All configuration values are SI; the trap frequency is used as an angular
frequency. A run has a free phase of duration ``tau0`` in which gravity
correlates the masses, followed by a probe phase in which each mass is
coupled to its own driven cavity and the cavity covariance matrix is
sampled at ``tau, 2 tau, ..., T tau``.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy import constants
from scipy.optimize import brentq

from ._validation import check_random_state
from .estimator import (
    LAMBDA_GRID,
    NoiseModel,
    add_measurement_noise,
    design_matrix,
    ridge_fit,
    select_lambda,
    std_estimation_error,
    targets_to_state,
    state_to_targets,
)
from .exceptions import ProtocolError, RankDeficiencyWarning, SteadyStateError, ValidationError
from .gaussian import GaussianPropagator, LinearDynamics, is_physical, log_negativity, log_negativity_batch

G_NEWTON = constants.G
HBAR = constants.hbar
C_LIGHT = constants.c
OSMIUM_DENSITY = 22590.0
ETA_NEGLECT_TOL = 1e-6
MAX_REDRAWS = 1000
_IU = np.triu_indices(4)


def _pair(value) -> tuple[float, float]:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (2,))
    return float(arr[0]), float(arr[1])


@dataclass(frozen=True)
class GieConfig:
    """
    Physical and protocol parameters of the two-mass experiment (SI units).

    Per-cavity quantities accept a scalar (used for both cavities) or a pair.
    ``detuning_mode="fixed"`` uses ``cavity_rates`` verbatim for the decay
    rates and effective detunings; ``"randomized"`` draws each of them once
    per experiment uniformly from ``[1, 2]Γc`` with ``Γc = πc/(2 F L)``.
    """

    mass: float = 1.0
    trap_frequency: float = 0.1
    density: float = OSMIUM_DENSITY
    separation: float | None = None
    damping: float = 1e-6
    squeezing: float = 1.73
    nbar: float = 0.0
    cavity_length: tuple = (0.025, 0.025)
    wavelength: tuple = (1064e-9, 1064e-9)
    laser_power: tuple = (0.05, 0.05)
    finesse: tuple = (8e4, 8e4)
    cavity_rates: tuple | None = None
    detunings: tuple | None = None
    detuning_mode: str = "randomized"
    tau0: float = 0.5
    probe_time: float = 1e-6
    n_multiplex: int = 4
    zeta: float = 2e-2
    n_train: int = 50
    n_test: int = 100
    nbar_train_range: tuple = (0.0, 1.0)
    ridge_lambda: float | str = "auto"

    def __post_init__(self):
        for name in ("cavity_length", "wavelength", "laser_power", "finesse"):
            object.__setattr__(self, name, _pair(getattr(self, name)))
        for name in ("cavity_rates", "detunings"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _pair(getattr(self, name)))
        object.__setattr__(self, "nbar_train_range", tuple(float(v) for v in self.nbar_train_range))
        positive = {
            "mass": self.mass, "trap_frequency": self.trap_frequency, "density": self.density,
            "damping": self.damping, "probe_time": self.probe_time,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("cavity_length", "wavelength", "finesse"):
            if min(getattr(self, name)) <= 0:
                raise ValidationError(f"{name} must be positive")
        if min(self.laser_power) < 0:
            raise ValidationError("laser_power must be nonnegative")
        if self.trap_frequency / self.damping < 100:
            raise ValidationError("mechanical quality factor ω/γ must be at least 100")
        if self.squeezing < 0 or self.nbar < 0:
            raise ValidationError("squeezing and nbar must be nonnegative")
        if self.detuning_mode not in ("fixed", "randomized"):
            raise ValidationError(f"unknown detuning_mode {self.detuning_mode!r}")
        if self.tau0 < 0:
            raise ValidationError("tau0 must be nonnegative")
        if self.n_multiplex < 1 or self.n_train < 2 or self.n_test < 2:
            raise ValidationError("n_multiplex >= 1 and n_train, n_test >= 2 are required")
        lo, hi = self.nbar_train_range
        if not 0 <= lo < hi:
            raise ValidationError("nbar_train_range must satisfy 0 <= low < high")
        if self.zeta < 0:
            raise ValidationError("zeta must be nonnegative")
        if not 0 < self.eta < 1:
            raise ValidationError(f"gravitational coupling η = {self.eta:.3g} must lie in (0, 1)")

    @property
    def radius(self) -> float:
        return (3.0 * self.mass / (4.0 * np.pi * self.density)) ** (1.0 / 3.0)

    @property
    def distance(self) -> float:
        return 2.0 * self.radius if self.separation is None else self.separation

    @property
    def eta(self) -> float:
        return 2.0 * G_NEWTON * self.mass / (self.trap_frequency**2 * self.distance**3)

    @property
    def zero_point_length(self) -> float:
        return np.sqrt(HBAR / (self.mass * self.trap_frequency))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GieConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ValidationError(f"unknown GIE config keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


class ProbeSteadyState(NamedTuple):
    alpha_s: float
    beta_s: float
    x_As: float
    x_Bs: float
    p_As: float
    p_Bs: float
    detuning_a: float
    detuning_b: float
    bare_detuning_a: float
    bare_detuning_b: float
    coupling_a: float
    coupling_b: float
    kappa_a: float
    kappa_b: float


def cavity_decay_rate(finesse: float, length: float) -> float:
    """``κ = π c / (2 F L)``."""
    return np.pi * C_LIGHT / (2.0 * finesse * length)


def optomechanical_coupling(config: GieConfig) -> tuple[float, float]:
    """Single-photon couplings ``G0 = (ω_cav / L) √(ħ / mω)``."""
    out = []
    for lam, length in zip(config.wavelength, config.cavity_length):
        omega_cav = 2.0 * np.pi * C_LIGHT / lam
        out.append(omega_cav / length * config.zero_point_length)
    return out[0], out[1]


def drive_strength(config: GieConfig, kappa: tuple[float, float]) -> tuple[float, float]:
    """``E = √(2 P κ / ħ ω_l)`` for each cavity."""
    out = []
    for power, k, lam in zip(config.laser_power, kappa, config.wavelength):
        omega_l = 2.0 * np.pi * C_LIGHT / lam
        out.append(np.sqrt(2.0 * power * k / (HBAR * omega_l)))
    return out[0], out[1]


def cavity_parameters(config: GieConfig, rng=None) -> tuple[tuple, tuple]:
    """Decay rates and effective detunings ``((κa, κb), (Δa, Δb))``."""
    base = tuple(cavity_decay_rate(f, length) for f, length in zip(config.finesse, config.cavity_length))
    if config.detuning_mode == "fixed":
        kappa = config.cavity_rates if config.cavity_rates is not None else base
        delta = config.detunings if config.detunings is not None else kappa
        return tuple(kappa), tuple(delta)
    rng = check_random_state(rng)
    draws = rng.uniform(1.0, 2.0, 4)
    return (draws[0] * base[0], draws[1] * base[1]), (draws[2] * base[0], draws[3] * base[1])


def gie_initial_cm(r0: float, nbar: float) -> NDArray[np.float64]:
    """Product of two squeezed thermal states ``diag[e^{2r}, e^{-2r}, ...](1 + 2n̄)/2``."""
    if r0 < 0 or nbar < 0:
        raise ValidationError("squeezing and nbar must be nonnegative")
    s = np.exp(2.0 * r0)
    return np.diag([s, 1 / s, s, 1 / s]) * (1.0 + 2.0 * nbar) / 2.0


def mass_phase_dynamics(config: GieConfig, nbar: float | None = None) -> LinearDynamics:
    """Free evolution of ``(x_A, p_A, x_B, p_B)`` with the expanded gravitational coupling."""
    eta = config.eta
    if not 0 < eta < 1:
        raise ValidationError(f"η = {eta:.3g} outside (0, 1): expansion of the potential is unstable")
    w, g = config.trap_frequency, config.damping
    nbar = config.nbar if nbar is None else nbar
    a = np.array([
        [0.0, w, 0.0, 0.0],
        [-w * (1 - eta), -g, -w * eta, 0.0],
        [0.0, 0.0, 0.0, w],
        [-w * eta, 0.0, -w * (1 - eta), -g],
    ])
    noise = g * (2 * nbar + 1)
    return LinearDynamics(a, np.diag([0.0, noise, 0.0, noise]))


def solve_bare_detuning(effective: float, g0: float, drive: float, kappa: float, omega: float, sign: float) -> float:
    """
    Bare cavity detuning that produces a target effective detuning.

    With the mechanical shift ``x_s = ±G0 α²/ω`` the effective detuning is
    ``Δ = Δ0 ∓ G0 x_s``; ``α`` depends only on ``Δ`` so the inversion is explicit.
    """
    alpha = abs(drive) / np.hypot(kappa, effective)
    x_s = sign * g0 * alpha**2 / omega
    return effective + sign * g0 * x_s


def solve_effective_detuning(bare: float, g0: float, drive: float, kappa: float, omega: float, sign: float) -> float:
    """
    Effective detuning from a bare one (self-consistent steady state).

    Solves ``Δ = Δ0 - G0² E² / (ω (κ² + Δ²))`` for the root continuously
    connected to ``Δ0``; raises :class:`SteadyStateError` if no root is bracketed.
    """
    shift = g0**2 * drive**2 / omega

    def f(d):
        return d - bare + shift / (kappa**2 + d**2)

    lo, hi = bare - shift / kappa**2 - abs(bare) - 1.0, bare + 1.0
    try:
        if f(lo) * f(hi) > 0:
            raise ValueError("root not bracketed")
        return brentq(f, lo, hi, xtol=1e-12 * max(1.0, abs(bare)), maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise SteadyStateError(f"no self-consistent steady state for bare detuning {bare:g}: {exc}") from None


def probe_phase_dynamics(config: GieConfig, nbar: float | None = None, rng=None,
                         cavity: tuple | None = None) -> tuple[LinearDynamics, ProbeSteadyState]:
    """
    Linearized fluctuation dynamics of ``(x_A, p_A, x_B, p_B, x_a, p_a, x_b, p_b)``.

    The gravitational coupling is dropped during the short probe. ``cavity``
    fixes ``((κa, κb), (Δa, Δb))``; otherwise :func:`cavity_parameters` is used.
    """
    nbar = config.nbar if nbar is None else nbar
    if config.trap_frequency * config.probe_time * config.n_multiplex * config.eta > ETA_NEGLECT_TOL:
        warnings.warn("probe is long enough that neglecting gravity during it is questionable", stacklevel=2)
    (ka, kb), (da, db) = cavity if cavity is not None else cavity_parameters(config, rng)
    g0a, g0b = optomechanical_coupling(config)
    ea, eb = drive_strength(config, (ka, kb))
    w, g = config.trap_frequency, config.damping
    alpha = ea / np.hypot(ka, da)
    beta = eb / np.hypot(kb, db)
    x_as = g0a * alpha**2 / w
    x_bs = -g0b * beta**2 / w
    d0a = solve_bare_detuning(da, g0a, ea, ka, w, +1.0)
    d0b = solve_bare_detuning(db, g0b, eb, kb, w, -1.0)
    if not np.all(np.isfinite([alpha, beta, x_as, x_bs, d0a, d0b])):
        raise SteadyStateError("steady-state amplitudes are not finite")
    ga, gb = g0a * alpha * np.sqrt(2.0), g0b * beta * np.sqrt(2.0)
    a = np.zeros((8, 8))
    a[0, 1] = w
    a[1, 0], a[1, 1], a[1, 4] = -w, -g, ga
    a[2, 3] = w
    a[3, 2], a[3, 3], a[3, 6] = -w, -g, -gb
    a[4, 4], a[4, 5] = -ka, da
    a[5, 0], a[5, 4], a[5, 5] = ga, -da, -ka
    a[6, 6], a[6, 7] = -kb, db
    a[7, 2], a[7, 6], a[7, 7] = -gb, -db, -kb
    noise = g * (2 * nbar + 1)
    d = np.diag([0.0, noise, 0.0, noise, ka, ka, kb, kb])
    state = ProbeSteadyState(alpha, beta, x_as, x_bs, 0.0, 0.0, da, db, d0a, d0b, ga, gb, ka, kb)
    return LinearDynamics(a, d), state


def masses_at(config: GieConfig, nbar: float, tau0: float | None = None) -> NDArray[np.float64]:
    """Covariance matrix of the masses after the free phase."""
    tau0 = config.tau0 if tau0 is None else tau0
    v0 = gie_initial_cm(config.squeezing, nbar)
    if tau0 == 0:
        return v0
    return GaussianPropagator(mass_phase_dynamics(config, nbar), tau0).covariance(v0)


def true_entanglement(config: GieConfig, tau0: float | None = None) -> float:
    """Logarithmic negativity between the masses at ``tau0`` for the test state."""
    return log_negativity(masses_at(config, config.nbar, tau0))


def cavity_observables(config: GieConfig, v_masses: NDArray, nbar: float, cavity) -> NDArray[np.float64]:
    """Ten unique cavity-block CM elements at each of the ``T`` probe snapshots."""
    dyn, _ = probe_phase_dynamics(config, nbar, cavity=cavity)
    v0 = np.zeros(v_masses.shape[:-2] + (8, 8))
    v0[..., :4, :4] = v_masses
    v0[..., 4:, 4:] = 0.5 * np.eye(4)
    step = GaussianPropagator(dyn, config.probe_time)
    out = []
    v = v0
    for _ in range(config.n_multiplex):
        v = step.covariance(v)
        out.append(v[..., 4 + _IU[0], 4 + _IU[1]])
    return np.concatenate(out, axis=-1)


class GieResult(NamedTuple):
    E_est: NDArray[np.float64]
    E_in: float
    delta_E: float
    flags: dict


def _draw_training_nbar(config: GieConfig, rng) -> float:
    lo, hi = config.nbar_train_range
    # (lo, hi]: nbar = 0 is the test state and excluded from training
    return hi - (hi - lo) * rng.uniform()


def run_gie_experiment(config: GieConfig, rng=None) -> GieResult:
    """
    Train on separable thermal-squeezed masses, test on the ``n̄ = 0`` state.

    Every training draw samples ``n̄`` from ``nbar_train_range`` and is redrawn if
    the masses come out entangled after ``tau0``; the redraw count is reported in
    ``flags["rejected"]``. Observables carry fresh Gaussian noise of standard
    deviation ``zeta/2`` per element per snapshot.
    """
    rng = check_random_state(rng)
    cavity = cavity_parameters(config, rng)
    noise = NoiseModel(config.zeta)

    train_states, train_nbar, rejected = [], [], 0
    while len(train_states) < config.n_train:
        nbar = _draw_training_nbar(config, rng)
        v = masses_at(config, nbar)
        if log_negativity(v) > 0:
            rejected += 1
            if rejected > MAX_REDRAWS and not train_states:
                raise ProtocolError(
                    f"all {rejected} training draws are entangled at tau0={config.tau0:g} s; "
                    f"nbar range {config.nbar_train_range} cannot produce separable training states"
                )
            continue
        train_states.append(v)
        train_nbar.append(nbar)
    train_states = np.stack(train_states)

    # Observables depend on n̄ through the mass bath as well as the initial state.
    x_train = np.stack([
        cavity_observables(config, v, nbar, cavity) for v, nbar in zip(train_states, train_nbar)
    ])
    x_train = add_measurement_noise(x_train, noise, rng)
    y_train = state_to_targets(train_states, "cv")

    if config.ridge_lambda == "auto":
        lam = select_lambda(x_train, y_train, LAMBDA_GRID, 0.2, rng)
    else:
        lam = float(config.ridge_lambda)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        readout = ridge_fit(design_matrix(x_train), y_train, lam)

    v_test = masses_at(config, config.nbar)
    e_in = log_negativity(v_test)
    clean = cavity_observables(config, v_test, config.nbar, cavity)
    x_test = add_measurement_noise(np.tile(clean, (config.n_test, 1)), noise, rng)
    recon = targets_to_state(readout.predict(x_test), "cv")
    e_est = log_negativity_batch(recon)
    flags = {
        "rejected": rejected,
        "ridge_lambda": lam,
        "kappa": list(cavity[0]),
        "detuning": list(cavity[1]),
        "unphysical_estimates": int(sum(not is_physical(v) for v in recon)),
    }
    return GieResult(e_est, e_in, std_estimation_error(e_est, e_in), flags)


def direct_measurement_baseline(config: GieConfig, zeta_direct: float, rng=None) -> float:
    """
    Spread of the entanglement computed from noisy direct CM measurements.

    Each of ``n_test`` repetitions perturbs the 10 unique elements of the true
    mass CM at ``tau0`` by Gaussian noise of standard deviation ``zeta_direct/2``.
    """
    if zeta_direct < 0:
        raise ValidationError("zeta_direct must be nonnegative")
    rng = check_random_state(rng)
    v = masses_at(config, config.nbar)
    e_in = log_negativity(v)
    targets = np.tile(state_to_targets(v[None], "cv"), (config.n_test, 1))
    noisy = add_measurement_noise(targets, NoiseModel(zeta_direct), rng)
    e_est = log_negativity_batch(targets_to_state(noisy, "cv"))
    return std_estimation_error(e_est, e_in)
