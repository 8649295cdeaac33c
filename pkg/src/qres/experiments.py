"""
Seeded sweeps of the entanglement-estimation error.

A scenario fixes the system, the sweep axis and its values, the number of
reservoir realizations and the protocol settings. Every (series, sweep point,
realization) task draws from its own substream keyed by the master seed and
its indices, so results do not depend on execution order or on ``jobs``.
"""

from __future__ import annotations

import configparser
import dataclasses
import functools
import os
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .cv_reservoir import OBSERVABLE_SETS as CV_OBSERVABLES
from .cv_reservoir import TOPOLOGIES, VARIANTS, CVReservoir
from .estimator import (
    LAMBDA_GRID,
    NoiseModel,
    add_measurement_noise,
    design_matrix,
    entanglement_of,
    estimation_error,
    fit_error_scaling,
    ridge_fit,
    select_lambda,
    state_to_targets,
    targets_to_state,
)
from .exceptions import CutoffError, RankDeficiencyWarning, ValidationError
from .gie import GieConfig, run_gie_experiment
from .hybrid import LEAKAGE_TOL, HybridReservoir
from .io import fmt, read_csv, read_json, write_csv, write_json
from .qubit import MAX_QUBITS
from .qubit import OBSERVABLE_SETS as QUBIT_OBSERVABLES
from .qubit import QubitReservoir
from .states import generate_ensemble

SYSTEMS = ("cv", "qubit", "hybrid", "gie")
SWEEP_AXES = ("n_nodes", "n_qubits", "n_multiplex", "tau0")
NAMES = ("fig2", "fig3a", "fig3b", "fig4", "figS1", "figS2", "figS3", "figS4", "figS5", "custom")
OUTPUT_ROOT_ENV = "QRES_OUTPUT_ROOT"

# substream tags
_RESERVOIR, _NOISE, _SPLIT, _GIE = 1, 2, 3, 4
_TRAIN_STREAM, _TEST_STREAM = 0, 1

_PRESETS = {
    "fig2": dict(system="cv", sweep_axis="n_nodes", sweep=tuple(range(1, 8))),
    "fig3a": dict(system="cv", sweep_axis="n_nodes", sweep=tuple(range(1, 13)), zeta=1e-3,
                  ridge_lambda="auto", fit_from=4, sql_guide=True),
    "fig3b": dict(system="cv", sweep_axis="n_nodes", sweep=tuple(range(1, 13)), zeta=1e-3,
                  ridge_lambda="auto", observables="mean_excitation", variants=("two_photon_pump",),
                  n_multiplex=3, fit_from=4, sql_guide=True),
    "fig4": dict(system="gie", sweep_axis="tau0", sweep=(0.5, 1.0, 2.0, 3.0, 4.0, 5.0),
                 ridge_lambda="auto", n_multiplex=4, zeta=2e-2),
    "figS1": dict(system="qubit", sweep_axis="n_qubits", sweep=(1, 2, 3, 4, 5),
                  observables="pauli_triple"),
    "figS2": dict(system="qubit", sweep_axis="n_qubits", sweep=(1, 2, 3, 4, 5, 6), zeta=1e-3,
                  ridge_lambda="auto", observables="pauli_triple", sql_guide=True),
    "figS3": dict(system="cv", sweep_axis="n_nodes", sweep=tuple(range(1, 13)),
                  observables="mean_excitation", variants=("two_photon_pump", "ultra_strong")),
    "figS4": dict(system="cv", sweep_axis="n_nodes", sweep=tuple(range(1, 7)),
                  train_kind="separable"),
    "figS5": dict(system="gie", sweep_axis="n_multiplex", sweep=(1, 2, 3, 4, 5, 6), tau0=5.0,
                  ridge_lambda="auto", zeta=2e-2, fit_from=1, sql_guide=True, heisenberg_guide=True),
    "custom": dict(),
}


@dataclass(frozen=True)
class Scenario:
    """
    Validated sweep description.

    ``sweep`` holds the values of ``sweep_axis``; ``variants`` lists the reservoir
    variants run as separate series (CV only). ``gie`` carries overrides for
    :class:`~qres.gie.GieConfig`.
    """

    name: str = "custom"
    system: str = "cv"
    sweep_axis: str = "n_nodes"
    sweep: tuple = (4,)
    n_realizations: int = 10
    n_train: int = 50
    n_test: int = 100
    zeta: float = 0.0
    ridge_lambda: float | str = 0.0
    seed: int = 2024
    observables: str | None = None
    variants: tuple = ("standard",)
    n_multiplex: int = 1
    n_nodes: int = 4
    n_qubits: int = 5
    tau0: float = 0.5
    train_kind: str = "entangled"
    test_kind: str = "entangled"
    gamma_scale: float = 1.0
    topology: str = "all_to_all"
    fock_cutoff: int = 20
    check_leakage: bool = True
    max_qubits: int = MAX_QUBITS
    fit_from: float | None = None
    sql_guide: bool = False
    heisenberg_guide: bool = False
    gie: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValidationError(f"unknown scenario {self.name!r}; choose from {NAMES}")
        if self.system not in SYSTEMS:
            raise ValidationError(f"unknown system {self.system!r}")
        if self.sweep_axis not in SWEEP_AXES:
            raise ValidationError(f"unknown sweep axis {self.sweep_axis!r}")
        allowed_axes = {
            "cv": ("n_nodes", "n_multiplex"), "qubit": ("n_qubits", "n_multiplex"),
            "hybrid": ("n_multiplex",), "gie": ("tau0", "n_multiplex"),
        }[self.system]
        if self.sweep_axis not in allowed_axes:
            raise ValidationError(f"system {self.system!r} cannot sweep {self.sweep_axis!r}")
        if not self.sweep:
            raise ValidationError("sweep is empty")
        if self.sweep_axis != "tau0" and any(v != int(v) or v < 1 for v in self.sweep):
            raise ValidationError(f"{self.sweep_axis} values must be positive integers")
        if self.n_realizations < 1 or self.n_train < 2 or self.n_test < 1:
            raise ValidationError("n_realizations >= 1, n_train >= 2 and n_test >= 1 are required")
        if self.zeta < 0:
            raise ValidationError("zeta must be nonnegative")
        if self.ridge_lambda != "auto" and not float(self.ridge_lambda) >= 0:
            raise ValidationError("ridge_lambda must be 'auto' or a nonnegative number")
        if self.system == "cv":
            if self.observables not in CV_OBSERVABLES:
                raise ValidationError(f"cv observables must be one of {CV_OBSERVABLES}")
            bad = [v for v in self.variants if v not in VARIANTS]
            if bad:
                raise ValidationError(f"unknown variants {bad}")
            if self.topology not in TOPOLOGIES:
                raise ValidationError(f"unknown topology {self.topology!r}")
        elif self.system == "qubit" and self.observables not in QUBIT_OBSERVABLES:
            raise ValidationError(f"qubit observables must be one of {QUBIT_OBSERVABLES}")
        for kind in (self.train_kind, self.test_kind):
            if kind not in ("entangled", "separable"):
                raise ValidationError("train_kind/test_kind must be 'entangled' or 'separable'")
        if self.system == "gie":
            GieConfig.from_dict(self.gie_config_dict(self.sweep[0]))

    @property
    def metric(self) -> str:
        return "delta_E" if self.system == "gie" else "Delta_E"

    @property
    def series(self) -> tuple:
        return self.variants if self.system == "cv" else (self.system,)

    def gie_config_dict(self, value) -> dict:
        base = {
            "tau0": self.tau0, "n_multiplex": self.n_multiplex, "zeta": self.zeta,
            "n_train": self.n_train, "n_test": self.n_test, "ridge_lambda": self.ridge_lambda,
        }
        base.update(self.gie)
        base[self.sweep_axis] = float(value) if self.sweep_axis == "tau0" else int(value)
        return base

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def make_scenario(name: str, **overrides) -> Scenario:
    """Preset for ``name`` with keyword overrides applied."""
    if name not in _PRESETS:
        raise ValidationError(f"unknown scenario {name!r}; choose from {NAMES}")
    params = dict(_PRESETS[name])
    params.update(overrides)
    params["name"] = name
    system = params.get("system", "cv")
    if params.get("observables") is None and system in ("cv", "qubit"):
        params["observables"] = "local_cm_triple" if system == "cv" else "pauli_triple"
    for key in ("sweep", "variants"):
        if key in params:
            params[key] = tuple(params[key])
    return Scenario(**params)


# ---------------------------------------------------------------- config files

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Scenario)}
_INT_KEYS = {"n_realizations", "n_train", "n_test", "seed", "n_multiplex", "n_nodes", "n_qubits",
             "fock_cutoff", "max_qubits"}
_FLOAT_KEYS = {"zeta", "tau0", "gamma_scale", "fit_from"}
_BOOL_KEYS = {"check_leakage", "sql_guide", "heisenberg_guide"}
_LIST_KEYS = {"sweep", "variants"}
_STR_KEYS = {"name", "system", "sweep_axis", "observables", "train_kind", "test_kind", "topology"}


def _key_lines(text: str) -> dict:
    lines, section = {}, None
    for k, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            section = m.group(1).strip()
        elif section and s and s[0] not in "#;" and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            lines[(section, key)] = k
    return lines


def _parse_sweep(raw: str) -> tuple:
    raw = raw.strip()
    m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", raw)
    if m:
        return tuple(range(int(m.group(1)), int(m.group(2)) + 1))
    vals = []
    for item in re.split(r"[,\s]+", raw):
        if item:
            v = float(item)
            vals.append(int(v) if v == int(v) and "." not in item and "e" not in item.lower() else v)
    return tuple(vals)


def load_scenario(path, seed: int | None = None) -> Scenario:
    """
    Read an INI scenario file.

    The ``[scenario]`` section holds scenario keys (``name`` selects the preset
    the other keys override); an optional ``[gie]`` section holds
    :class:`~qres.gie.GieConfig` overrides. ``sweep`` accepts ``a..b`` or a
    comma-separated list. Errors name the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"scenario file {path} does not exist")
    text = path.read_text()
    lines = _key_lines(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if not parser.has_section("scenario"):
        raise ValidationError(f"{path}: missing [scenario] section")
    extra = set(parser.sections()) - {"scenario", "gie"}
    if extra:
        raise ValidationError(f"{path}: unknown sections {sorted(extra)}")

    def where(section, key):
        return f"{path}:{lines.get((section, key), '?')}"

    params = {}
    for key, raw in parser.items("scenario"):
        if key not in _FIELD_TYPES or key == "gie":
            raise ValidationError(f"{where('scenario', key)}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                params[key] = int(raw)
            elif key in _FLOAT_KEYS:
                params[key] = float(raw)
            elif key in _BOOL_KEYS:
                params[key] = parser.getboolean("scenario", key)
            elif key == "sweep":
                params[key] = _parse_sweep(raw)
            elif key == "variants":
                params[key] = tuple(v.strip() for v in raw.split(",") if v.strip())
            elif key == "ridge_lambda":
                params[key] = raw.strip() if raw.strip() == "auto" else float(raw)
            else:
                params[key] = raw.strip()
        except ValueError as exc:
            raise ValidationError(f"{where('scenario', key)}: bad value {raw!r} for {key} ({exc})") from None
    if parser.has_section("gie"):
        gie = {}
        known = {f.name for f in dataclasses.fields(GieConfig)}
        for key, raw in parser.items("gie"):
            if key not in known:
                raise ValidationError(f"{where('gie', key)}: unknown GIE key {key!r}")
            try:
                vals = [float(v) for v in raw.split(",")] if key != "detuning_mode" else [raw.strip()]
            except ValueError:
                if key == "ridge_lambda" and raw.strip() == "auto":
                    vals = ["auto"]
                else:
                    raise ValidationError(f"{where('gie', key)}: bad value {raw!r}") from None
            gie[key] = vals[0] if len(vals) == 1 else tuple(vals)
        params["gie"] = gie
    if seed is not None:
        params["seed"] = seed
    name = params.pop("name", "custom")
    try:
        return make_scenario(name, **params)
    except (ValidationError, TypeError) as exc:
        culprit = next((k for k in params if k in str(exc)), None)
        loc = where("scenario", culprit) if culprit else str(path)
        raise ValidationError(f"{loc}: {exc}") from None


# ---------------------------------------------------------------- task execution


@functools.lru_cache(maxsize=16)
def _ensemble(kind: str, n: int, seed: int, gamma_scale: float, stream: int):
    ens = generate_ensemble(kind, n, seed, gamma_scale, stream)
    return ens.matrices, ens.true_entanglement


def _ensemble_kind(system: str, which: str) -> str:
    if system == "cv":
        return "cv_entangled" if which == "entangled" else "cv_separable"
    return "qubit_random" if which == "entangled" else "qubit_separable"


class TaskResult(NamedTuple):
    value: float
    extras: dict


def _reservoir(sc: Scenario, series: str, value, rng):
    t = int(value) if sc.sweep_axis == "n_multiplex" else sc.n_multiplex
    if sc.system == "cv":
        m = int(value) if sc.sweep_axis == "n_nodes" else sc.n_nodes
        return CVReservoir(n_nodes=m, variant=series, observables=sc.observables, n_multiplex=t,
                           gamma_scale=sc.gamma_scale, topology=sc.topology, random_state=rng)
    if sc.system == "qubit":
        q = int(value) if sc.sweep_axis == "n_qubits" else sc.n_qubits
        return QubitReservoir(n_qubits=q, observables=sc.observables, n_multiplex=t,
                              gamma_scale=sc.gamma_scale, max_qubits=sc.max_qubits, random_state=rng)
    return HybridReservoir(n_multiplex=t, fock_cutoff=sc.fock_cutoff, gamma_scale=sc.gamma_scale,
                           check_leakage=False, random_state=rng)


def run_task(sc: Scenario, s: int, i: int, r: int) -> TaskResult:
    """Evaluate one (series, sweep point, realization) cell."""
    value = sc.sweep[i]
    if sc.system == "gie":
        cfg = GieConfig.from_dict(sc.gie_config_dict(value))
        res = run_gie_experiment(cfg, np.random.default_rng([sc.seed, _GIE, s, i, r]))
        return TaskResult(res.delta_E, {"E_in": res.E_in, "E_est_mean": float(np.mean(res.E_est))})

    kind = "cv" if sc.system == "cv" else "qubit"
    x_tr_states, _ = _ensemble(_ensemble_kind(kind, sc.train_kind), sc.n_train, sc.seed,
                               sc.gamma_scale, _TRAIN_STREAM)
    x_te_states, e_in = _ensemble(_ensemble_kind(kind, sc.test_kind), sc.n_test, sc.seed,
                                  sc.gamma_scale, _TEST_STREAM)
    res = _reservoir(sc, sc.series[s], value, np.random.default_rng([sc.seed, _RESERVOIR, s, i, r])).fit()
    x_tr = res.transform(x_tr_states)
    x_te = res.transform(x_te_states)
    extras = {}
    if sc.system == "hybrid":
        leak = res.channel_.leakage(np.concatenate([x_tr_states, x_te_states]))
        extras["leakage"] = float(leak.max())
        if sc.check_leakage and extras["leakage"] > LEAKAGE_TOL:
            raise CutoffError(
                f"realization {r} at {sc.sweep_axis}={value}: population {extras['leakage']:.3g} "
                f"in the top two Fock levels exceeds {LEAKAGE_TOL:g}; increase fock_cutoff beyond {sc.fock_cutoff}"
            )
    noise_rng = np.random.default_rng([sc.seed, _NOISE, s, i, r])
    noise = NoiseModel(sc.zeta)
    x_tr = add_measurement_noise(x_tr, noise, noise_rng)
    x_te = add_measurement_noise(x_te, noise, noise_rng)
    y_tr = state_to_targets(x_tr_states, kind)
    if sc.ridge_lambda == "auto":
        lam = select_lambda(x_tr, y_tr, LAMBDA_GRID, 0.2, np.random.default_rng([sc.seed, _SPLIT, s, i, r]))
    else:
        lam = float(sc.ridge_lambda)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        readout = ridge_fit(design_matrix(x_tr), y_tr, lam)
    e_est = entanglement_of(targets_to_state(readout.predict(x_te), kind), kind)
    extras["max_abs_error"] = float(np.max(np.abs(e_est - e_in)))
    extras["ridge_lambda"] = lam
    return TaskResult(estimation_error(e_est, e_in), extras)


def _init_worker():
    threadpool_limits(1)


def _run_indexed(args):
    sc, s, i, r = args
    return run_task(sc, s, i, r)


class ScenarioResult(NamedTuple):
    scenario: Scenario
    values: np.ndarray  # (n_series, n_sweep, n_realizations)
    extras: list
    output_dir: Path | None


def execute(sc: Scenario, jobs: int = 1) -> ScenarioResult:
    """Run every task; results are ordered by (series, sweep index, realization)."""
    if jobs < 1:
        raise ValidationError("jobs must be at least 1")
    tasks = [(sc, s, i, r) for s in range(len(sc.series))
             for i in range(len(sc.sweep)) for r in range(sc.n_realizations)]
    if jobs == 1:
        with threadpool_limits(1):
            results = [_run_indexed(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as pool:
            results = list(pool.map(_run_indexed, tasks, chunksize=1))
    shape = (len(sc.series), len(sc.sweep), sc.n_realizations)
    values = np.array([res.value for res in results]).reshape(shape)
    return ScenarioResult(sc, values, [res.extras for res in results], None)


# ---------------------------------------------------------------- output


def default_output_dir(sc: Scenario) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV, "results")
    return Path(root) / sc.name


def _series_suffix(sc: Scenario, s: int) -> str:
    return "" if len(sc.series) == 1 else f"_{sc.series[s]}"


def _fmt_sweep(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else fmt(v)


def scaling_report(sc: Scenario, means: np.ndarray) -> dict | None:
    if sc.fit_from is None:
        return None
    pts = [(float(v), float(m)) for v, m in zip(sc.sweep, means) if v >= sc.fit_from]
    if len(pts) < 3 or any(m <= 0 for _, m in pts):
        return None
    fit = fit_error_scaling(pts)
    return {"fit_from": sc.fit_from, "n_points": len(pts), "slope": fit.slope, "stderr": fit.stderr,
            "intercept": fit.intercept, "ci95": [fit.ci_low, fit.ci_high], "beyond_sql": fit.slope < -0.5}


def write_results(result: ScenarioResult, out_dir) -> Path:
    """Per-point CSV, summary CSV, slope report (where applicable) and manifest."""
    sc = result.scenario
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, slopes = [], {}
    n_sw, n_r = len(sc.sweep), sc.n_realizations
    for s, label in enumerate(sc.series):
        suffix = _series_suffix(sc, s)
        extra_keys = sorted(result.extras[s * n_sw * n_r].keys())
        rows = []
        for i, v in enumerate(sc.sweep):
            for r in range(n_r):
                ex = result.extras[(s * n_sw + i) * n_r + r]
                rows.append([_fmt_sweep(v), r, float(result.values[s, i, r])] + [ex[k] for k in extra_keys])
        name = f"points{suffix}.csv"
        write_csv(out / name, ["sweep_value", "realization", sc.metric] + extra_keys, rows)
        v = result.values[s]
        means = v.mean(axis=1)
        std = v.std(axis=1, ddof=1) if n_r > 1 else np.zeros(n_sw)
        summary = [[_fmt_sweep(x), float(m), float(d), float(lo), float(hi), n_r]
                   for x, m, d, lo, hi in zip(sc.sweep, means, std, v.min(axis=1), v.max(axis=1))]
        sname = f"summary{suffix}.csv"
        write_csv(out / sname, ["sweep_value", "mean", "std", "min", "max", "n"], summary)
        files += [name, sname]
        rep = scaling_report(sc, means)
        if rep is not None:
            slopes[label] = rep
    if slopes:
        write_json(out / "slope.json", slopes)
        files.append("slope.json")
    manifest = {
        "scenario": sc.to_dict(),
        "series": list(sc.series),
        "metric": sc.metric,
        "files": files,
        "version": __version__,
        "substreams": {
            "train_ensemble": "default_rng([seed, 0, i])",
            "test_ensemble": "default_rng([seed, 1, i])",
            "reservoir": f"default_rng([seed, {_RESERVOIR}, series, sweep_index, realization])",
            "noise": f"default_rng([seed, {_NOISE}, series, sweep_index, realization])",
            "lambda_split": f"default_rng([seed, {_SPLIT}, series, sweep_index, realization])",
            "gie": f"default_rng([seed, {_GIE}, series, sweep_index, realization])",
        },
    }
    write_json(out / "manifest.json", manifest)
    return out


def run_scenario(source, out_dir=None, jobs: int = 1, seed: int | None = None) -> ScenarioResult:
    """Load (path) or accept a :class:`Scenario`, execute it and write all result files."""
    if isinstance(source, Scenario):
        sc = source if seed is None else dataclasses.replace(source, seed=seed)
    else:
        sc = load_scenario(source, seed)
    result = execute(sc, jobs)
    out = Path(out_dir) if out_dir is not None else default_output_dir(sc)
    write_results(result, out)
    return result._replace(output_dir=out)


def scenario_from_manifest(path) -> Scenario:
    """Rebuild the exact scenario (seeds included) recorded in a manifest."""
    data = read_json(path)["scenario"]
    data["sweep"] = tuple(data["sweep"])
    data["variants"] = tuple(data["variants"])
    return Scenario(**data)


# ---------------------------------------------------------------- plot data


def emit_plotdata(results_dir, out_dir=None) -> list[Path]:
    """
    Whitespace-separated plot data from a results directory.

    Columns are ``x mean std`` plus ``sql`` (``c x^-1/2``) and ``heisenberg``
    (``c x^-1``) guides anchored at the first fitted point where the
    scenario carries them. Nothing is written if any input is missing.
    """
    results_dir = Path(results_dir)
    manifest_path = results_dir / "manifest.json"
    if not manifest_path.exists():
        raise ValidationError(f"missing inputs in {results_dir}: manifest.json")
    manifest = read_json(manifest_path)
    sc = manifest["scenario"]
    summaries = [f for f in manifest["files"] if f.startswith("summary")]
    missing = [f for f in summaries if not (results_dir / f).exists()]
    if missing:
        raise ValidationError(f"missing inputs in {results_dir}: {', '.join(missing)}")
    tables = []
    for f in summaries:
        header, rows = read_csv(results_dir / f)
        if not rows:
            raise ValidationError(f"{results_dir / f}: empty sweep")
        tables.append((f, np.array([[float(x) for x in row[:3]] for row in rows])))
    out_dir = Path(out_dir) if out_dir is not None else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    anchor_from = sc.get("fit_from") or -np.inf
    for f, data in tables:
        x, mean, std = data.T
        cols, names = [x, mean, std], ["x", sc["name"] + "_mean", "std"]
        sel = np.flatnonzero(x >= anchor_from)
        k = sel[0] if sel.size else 0
        if sc.get("sql_guide"):
            cols.append(mean[k] * np.sqrt(x[k] / x))
            names.append("sql")
        if sc.get("heisenberg_guide"):
            cols.append(mean[k] * x[k] / x)
            names.append("heisenberg")
        lines = ["# " + " ".join(names)]
        lines += [" ".join(fmt(c[j]) for c in cols) for j in range(x.size)]
        target = out_dir / (f.replace("summary", sc["name"]).replace(".csv", ".dat"))
        target.write_text("\n".join(lines) + "\n")
        written.append(target)
    return written
