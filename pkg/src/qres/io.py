"""
Plain-text persistence for states, configurations, readouts and ensembles.

Floats are written with ``repr``, the shortest decimal string that round-trips
exactly, so files are byte-stable across runs and platforms.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cv_reservoir import ReservoirConfig
from .estimator import TrainedReadout
from .exceptions import ValidationError
from .gaussian import CovarianceMatrix
from .gie import GieConfig
from .hybrid import HybridConfig
from .qubit import DensityMatrix, QubitQnConfig
from .states import InputEnsemble, state_entanglement

CONFIG_TYPES = {
    "ReservoirConfig": ReservoirConfig,
    "QubitQnConfig": QubitQnConfig,
    "HybridConfig": HybridConfig,
    "GieConfig": GieConfig,
}


def fmt(x) -> str:
    """Shortest round-trip decimal for a real number."""
    return repr(float(x))


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_to_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def write_csv(path, header, rows) -> Path:
    """Write rows; floats use :func:`fmt`, everything else ``str``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    return rows[0], rows[1:]


def save_covariance(path, cm) -> Path:
    """CSV with a ``n_modes=<N>,ordering=<...>`` header line and ``2N`` rows."""
    cm = cm if isinstance(cm, CovarianceMatrix) else CovarianceMatrix(cm)
    lines = [f"n_modes={cm.n_modes},ordering={cm.ordering}"]
    lines += [",".join(fmt(x) for x in row) for row in cm.matrix]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_header(line: str, path) -> dict:
    try:
        return dict(item.split("=", 1) for item in line.strip().split(",") if item)
    except ValueError:
        raise ValidationError(f"{path}:1: malformed header {line.strip()!r}") from None


def load_covariance(path) -> CovarianceMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    header = _parse_header(lines[0], path)
    if "n_modes" not in header:
        raise ValidationError(f"{path}:1: header needs n_modes=<N>")
    n = 2 * int(header["n_modes"])
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        try:
            rows.append([float(x) for x in line.split(",")])
        except ValueError:
            raise ValidationError(f"{path}:{k}: non-numeric entry") from None
    m = np.array(rows)
    if m.shape != (n, n):
        raise ValidationError(f"{path}: expected {n}x{n} entries, got {m.shape}")
    return CovarianceMatrix(m, header.get("ordering", "interleaved"))


def save_density_matrix(path, rho) -> Path:
    """CSV with a ``dims=<d1>,<d2>`` header; each row interleaves real and imaginary parts."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    lines = ["dims=" + ",".join(str(d) for d in rho.subsystem_dims)]
    for row in rho.matrix:
        lines.append(",".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_density_matrix(path) -> DensityMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("dims="):
        raise ValidationError(f"{path}:1: header needs dims=<d1>,<d2>,...")
    dims = tuple(int(d) for d in lines[0][5:].split(","))
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        try:
            vals = np.array([float(x) for x in line.split(",")])
        except ValueError:
            raise ValidationError(f"{path}:{k}: non-numeric entry") from None
        rows.append(vals[0::2] + 1j * vals[1::2])
    return DensityMatrix(np.array(rows), dims)


def save_config(path, config) -> Path:
    name = type(config).__name__
    if name not in CONFIG_TYPES:
        raise ValidationError(f"cannot serialize {name}")
    return write_json(path, {"type": name, "config": config.to_dict()})


def load_config(path):
    data = read_json(path)
    name = data.get("type")
    if name not in CONFIG_TYPES:
        raise ValidationError(f"{path}: unknown config type {name!r}")
    return CONFIG_TYPES[name].from_dict(data["config"])


def save_readout(path, readout: TrainedReadout) -> Path:
    return write_json(path, readout.to_dict())


def load_readout(path) -> TrainedReadout:
    return TrainedReadout.from_dict(read_json(path))


def save_ensemble(directory, ensemble: InputEnsemble) -> Path:
    """One state file per member plus ``manifest.json`` with the true entanglement."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    is_cv = ensemble.kind.startswith("cv")
    files = []
    for i, state in enumerate(ensemble.states):
        name = f"state_{i:05d}.csv"
        (save_covariance if is_cv else save_density_matrix)(directory / name, state)
        files.append(name)
    write_json(directory / "manifest.json", {
        "kind": ensemble.kind,
        "seed": ensemble.seed,
        "n": len(ensemble),
        "files": files,
        "true_entanglement": [float(e) for e in ensemble.true_entanglement],
    })
    return directory


def load_ensemble(directory) -> InputEnsemble:
    directory = Path(directory)
    manifest = read_json(directory / "manifest.json")
    missing = [f for f in manifest["files"] if not (directory / f).exists()]
    if missing:
        raise ValidationError(f"{directory}: missing state files {missing[:5]}")
    loader = load_covariance if manifest["kind"].startswith("cv") else load_density_matrix
    states = tuple(loader(directory / f) for f in manifest["files"])
    ent = np.array([state_entanglement(s) for s in states])
    return InputEnsemble(manifest["kind"], states, ent, manifest["seed"])
