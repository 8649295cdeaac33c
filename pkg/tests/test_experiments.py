from __future__ import annotations

import numpy as np
import pytest

from qres.cli import main
from qres.exceptions import ValidationError
from qres.experiments import (
    emit_plotdata,
    load_scenario,
    make_scenario,
    run_scenario,
    scenario_from_manifest,
)
from qres.io import read_csv, read_json


def _write(path, text):
    path.write_text(text)
    return path


SMALL_CV = """[scenario]
name = custom
system = cv
sweep_axis = n_nodes
sweep = 2..4
n_realizations = 2
n_train = 20
n_test = 10
zeta = 1e-3
ridge_lambda = auto
fit_from = 2
sql_guide = true
seed = 7
"""


class TestScenarioFiles:
    def test_presets(self):
        sc = make_scenario("fig2")
        assert sc.sweep == tuple(range(1, 8)) and sc.n_realizations == 10
        assert (sc.n_train, sc.n_test) == (50, 100)
        assert make_scenario("figS3").variants == ("two_photon_pump", "ultra_strong")
        assert make_scenario("fig4").metric == "delta_E"

    def test_load(self, tmp_path):
        sc = load_scenario(_write(tmp_path / "s.cfg", SMALL_CV))
        assert sc.sweep == (2, 3, 4) and sc.ridge_lambda == "auto" and sc.sql_guide

    def test_list_sweep_and_seed_override(self, tmp_path):
        text = SMALL_CV.replace("sweep = 2..4", "sweep = 2, 5")
        sc = load_scenario(_write(tmp_path / "s.cfg", text), seed=99)
        assert sc.sweep == (2, 5) and sc.seed == 99

    @pytest.mark.parametrize("line, lineno, match", [
        ("bogus = 1", 3, "unknown key"),
        ("n_train = many", 3, "bad value"),
        ("sweep = 3..1", 3, "sweep"),
        ("system = warp", 3, "system"),
    ])
    def test_errors_carry_line(self, tmp_path, line, lineno, match):
        path = _write(tmp_path / "bad.cfg", f"[scenario]\nname = custom\n{line}\n")
        with pytest.raises(ValidationError, match=match) as info:
            load_scenario(path)
        assert f"bad.cfg:{lineno}" in str(info.value)

    def test_missing_section(self, tmp_path):
        with pytest.raises(ValidationError, match="scenario"):
            load_scenario(_write(tmp_path / "bad.cfg", "[other]\nx = 1\n"))

    def test_empty_sweep(self):
        with pytest.raises(ValidationError, match="empty"):
            make_scenario("custom", sweep=())

    def test_shipped_configs_parse(self):
        from pathlib import Path

        root = Path(__file__).resolve().parents[1] / "configs"
        for path in sorted(root.glob("*.cfg")):
            assert load_scenario(path).n_realizations >= 1


class TestRunAndOutputs:
    def test_outputs(self, tmp_path):
        res = run_scenario(load_scenario(_write(tmp_path / "s.cfg", SMALL_CV)), tmp_path / "out")
        out = res.output_dir
        header, rows = read_csv(out / "points.csv")
        assert header[:3] == ["sweep_value", "realization", "Delta_E"]
        assert len(rows) == 6
        header, rows = read_csv(out / "summary.csv")
        assert header == ["sweep_value", "mean", "std", "min", "max", "n"]
        assert "slope" in read_json(out / "slope.json")["standard"]
        manifest = read_json(out / "manifest.json")
        assert manifest["scenario"]["seed"] == 7 and "substreams" in manifest

    def test_rerun_from_manifest_is_byte_identical(self, tmp_path):
        first = run_scenario(load_scenario(_write(tmp_path / "s.cfg", SMALL_CV)), tmp_path / "a")
        again = run_scenario(scenario_from_manifest(first.output_dir / "manifest.json"), tmp_path / "b", jobs=2)
        for name in ("points.csv", "summary.csv", "slope.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_results(self, tmp_path):
        sc = load_scenario(_write(tmp_path / "s.cfg", SMALL_CV))
        a = run_scenario(sc, tmp_path / "a").values
        b = run_scenario(sc, tmp_path / "b", seed=8).values
        assert not np.array_equal(a, b)

    def test_plotdata_guides(self, tmp_path):
        res = run_scenario(load_scenario(_write(tmp_path / "s.cfg", SMALL_CV)), tmp_path / "out")
        (path,) = emit_plotdata(res.output_dir)
        lines = path.read_text().splitlines()
        assert lines[0] == "# x custom_mean std sql"
        data = np.array([[float(v) for v in line.split()] for line in lines[1:]])
        np.testing.assert_allclose(data[:, 3], data[0, 1] * np.sqrt(data[0, 0] / data[:, 0]))

    def test_plotdata_missing_inputs(self, tmp_path):
        with pytest.raises(ValidationError, match="manifest.json"):
            emit_plotdata(tmp_path)
        res = run_scenario(load_scenario(_write(tmp_path / "s.cfg", SMALL_CV)), tmp_path / "out")
        (res.output_dir / "summary.csv").unlink()
        with pytest.raises(ValidationError, match="summary.csv"):
            emit_plotdata(res.output_dir, tmp_path / "plots")
        assert not (tmp_path / "plots").exists()

    def test_hybrid_leakage_recorded(self, tmp_path):
        sc = make_scenario("custom", system="hybrid", sweep_axis="n_multiplex", sweep=(2,),
                           n_realizations=1, n_train=20, n_test=5, check_leakage=False)
        res = run_scenario(sc, tmp_path / "h")
        header, _ = read_csv(res.output_dir / "points.csv")
        assert "leakage" in header

    def test_qubit_capacity_error(self, tmp_path):
        sc = make_scenario("custom", system="qubit", sweep_axis="n_qubits", sweep=(3,),
                           n_realizations=1, max_qubits=2)
        from qres.exceptions import CapacityError

        with pytest.raises(CapacityError):
            run_scenario(sc, tmp_path / "q")


class TestCli:
    def test_run_and_plotdata(self, tmp_path, capsys):
        cfg = _write(tmp_path / "s.cfg", SMALL_CV)
        assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "2"]) == 0
        assert "slope" in capsys.readouterr().out
        assert main(["plotdata", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "custom.dat").exists()

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        cfg = _write(tmp_path / "bad.cfg", "[scenario]\nname = custom\nn_train = x\n")
        assert main(["run", str(cfg)]) == 2
        assert "bad.cfg:3" in capsys.readouterr().err

    def test_missing_results_exit_code(self, tmp_path):
        assert main(["plotdata", str(tmp_path / "nothing")]) == 2

    def test_capacity_error_exit_code(self, tmp_path, capsys):
        cfg = _write(tmp_path / "q.cfg", "[scenario]\nname = custom\nsystem = qubit\nsweep_axis = n_qubits\n"
                                         "sweep = 3\nn_realizations = 1\nmax_qubits = 2\n")
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3
        assert "CapacityError" in capsys.readouterr().err

    def test_gen_states(self, tmp_path, capsys):
        assert main(["gen-states", "qubit_separable", "3", "11", "--out", str(tmp_path / "s")]) == 0
        manifest = read_json(tmp_path / "s" / "manifest.json")
        assert manifest["kind"] == "qubit_separable" and max(manifest["true_entanglement"]) <= 1e-9

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QRES_OUTPUT_ROOT", str(tmp_path / "root"))
        assert main(["gen-states", "cv_entangled", "2", "1"]) == 0
        assert (tmp_path / "root" / "states_cv_entangled_2_1" / "manifest.json").exists()

    def test_gie(self, tmp_path):
        cfg = tmp_path / "g.json"
        cfg.write_text('{"tau0_values": [0.5, 1.0], "direct_zeta": 2e-5, "n_test": 20}')
        assert main(["gie", str(cfg), "--out", str(tmp_path / "g"), "--seed", "3"]) == 0
        header, rows = read_csv(tmp_path / "g" / "gie_estimates.csv")
        assert header == ["tau0_s", "test_index", "E_in", "E_est", "flags"]
        assert len(rows) == 40
        header, rows = read_csv(tmp_path / "g" / "gie_summary.csv")
        assert header[-1] == "direct_delta_E" and len(rows) == 2

    def test_gie_bad_key(self, tmp_path):
        cfg = tmp_path / "g.json"
        cfg.write_text('{"warp": 1}')
        assert main(["gie", str(cfg)]) == 2
