import json

import numpy as np
import pytest

from qpmsource import io as qio
from qpmsource.cli import EXIT_CONFIG, EXIT_NUMERIC, main

SMALL_GRID = {"grid": {"n": 96}}


def run(tmp_path, command, cfg=None, extra=(), name="out"):
    args = [command, "--out", str(tmp_path / name), *extra]
    if cfg is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        args += ["--config", str(path)]
    return main(args), tmp_path / name


def result(out, name):
    return json.loads((out / name).read_text())["results"]


def test_simulate_sfg_default_is_251_square_and_deterministic(tmp_path):
    code, out = run(tmp_path, "simulate-sfg")
    assert code == 0
    rows, cols, counts = qio.read_matrix_csv(out / "sfg_counts.csv")
    assert counts.shape == (251, 251)
    assert np.all(counts == np.round(counts))
    assert cols[0] == 1575.0 and rows[-1] == pytest.approx(1585.0)
    meta = json.loads((out / "sfg.json").read_text())
    assert meta["config"]["seed"] == 1
    assert meta["results"]["snr_db"] == pytest.approx(40.0, abs=1e-3)
    code, out2 = run(tmp_path, "simulate-sfg", name="again")
    for f in out.iterdir():
        assert f.read_bytes() == (out2 / f.name).read_bytes()


def test_echoed_config_reproduces_the_run(tmp_path):
    cfg = {"scan": {"signal_nm": [1579.0, 1581.0], "idler_nm": [1579.0, 1581.0]}}
    code, out = run(tmp_path, "simulate-sfg", cfg, ["--seed", "9"])
    assert code == 0
    echoed = json.loads((out / "sfg.json").read_text())["config"]
    code, out2 = run(tmp_path, "simulate-sfg", echoed, name="replay")
    assert code == 0
    assert (out / "sfg_counts.csv").read_bytes() == (out2 / "sfg_counts.csv").read_bytes()
    assert (out / "sfg.json").read_bytes() == (out2 / "sfg.json").read_bytes()


def test_seed_flag_overrides_file(tmp_path):
    cfg = {"seed": 4, "scan": {"signal_nm": [1579.0, 1580.0], "idler_nm": [1579.0, 1580.0]}}
    _, a = run(tmp_path, "simulate-sfg", cfg, name="a")
    _, b = run(tmp_path, "simulate-sfg", cfg, ["--seed", "5"], name="b")
    assert json.loads((b / "sfg.json").read_text())["config"]["seed"] == 5
    assert (a / "sfg_counts.csv").read_bytes() != (b / "sfg_counts.csv").read_bytes()


def test_toml_config_and_format_filter(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('seed = 2\n[scan]\nsignal_nm = [1579.0, 1580.0]\nidler_nm = [1579.0, 1580.0]\n')
    out = tmp_path / "o"
    assert main(["simulate-sfg", "--config", str(path), "--out", str(out), "--format", "csv"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["sfg.json", "sfg_counts.csv", "sfg_expected.csv"]


def test_missing_sellmeier_file_is_config_error_without_output(tmp_path, capsys):
    code, out = run(tmp_path, "simulate-sfg", {"sellmeier": "does-not-exist.json"})
    assert code == EXIT_CONFIG
    assert not out.exists()
    assert "does-not-exist.json" in capsys.readouterr().err


def test_bad_config_values_are_config_errors(tmp_path):
    assert run(tmp_path, "simulate-sfg", {"bogus": 1}, name="a")[0] == EXIT_CONFIG
    assert run(tmp_path, "simulate-sfg", {"seed": None}, name="b")[0] == EXIT_CONFIG
    assert run(tmp_path, "simulate-sfg", {"crystal": {"preset": "nope"}}, name="c")[0] == EXIT_CONFIG
    assert run(tmp_path, "simulate-sfg", {"crystal": {"period_um": -1, "length_mm": 3}},
               name="d")[0] == EXIT_CONFIG
    assert run(tmp_path, "simulate-sfg", {"scan": {"step_nm": 0.03}}, name="e")[0] == EXIT_CONFIG
    assert main(["error-model", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_shg_three_processes_columns(tmp_path):
    code, out = run(tmp_path, "simulate-shg")
    assert code == 0
    cols = qio.read_curve_csv(out / "shg.csv")
    names = list(cols)
    assert names[:2] == ["wavelength_nm", "total"]
    comps = [n for n in names if n.startswith("type-")]
    assert len(comps) == 3
    assert np.allclose(cols["total"], sum(cols[n] for n in comps))
    assert np.allclose(cols["expected_with_dark"], cols["total"] + 100.0)


def test_shg_single_process_total_equals_component(tmp_path):
    cfg = {"shg": {"range_nm": [1575.0, 1590.0], "processes": [{"name": "main"}]}}
    code, out = run(tmp_path, "simulate-shg", cfg)
    assert code == 0
    cols = qio.read_curve_csv(out / "shg.csv")
    assert np.array_equal(cols["total"], cols["main"])


def test_shg_out_of_range_sweep_is_domain_error(tmp_path, capsys):
    code, out = run(tmp_path, "simulate-shg", {"shg": {"range_nm": [400.0, 500.0], "step_nm": 1.0}})
    assert code == EXIT_NUMERIC
    assert not out.exists()
    assert "valid range" in capsys.readouterr().err


def test_fit_on_shipped_fixture(tmp_path):
    code, out = run(tmp_path, "fit")
    assert code == 0
    res = result(out, "fit.json")
    assert res["parameters"]["period_um"] == pytest.approx(46.125, rel=1e-5)
    assert res["parameters"]["length_mm"] == pytest.approx(29.0, rel=1e-4)
    assert res["converged"] is True
    assert "converged: true" in (out / "fit_report.txt").read_text()


def test_fit_from_user_csv(tmp_path):
    x = np.arange(1575.0, 1585.0001, 0.05)
    (tmp_path / "obs.csv").write_text(qio.curve_csv_text({"lam": x, "y": np.ones_like(x)}))
    cfg = {"fit": {"observations": "obs.csv", "free": {"period_um": [46.0, 46.2]}}}
    code, out = run(tmp_path, "fit", cfg)
    assert code == 0
    assert run(tmp_path, "fit", {"fit": {"observations": "nope.csv"}}, name="x")[0] == EXIT_CONFIG


def test_build_jsa_then_schmidt_from_file(tmp_path):
    code, out = run(tmp_path, "build-jsa", SMALL_GRID)
    assert code == 0
    side = json.loads((out / "jsa.json").read_text())
    assert side["normalized"] is True and side["shape"] == [96, 96]
    code, sc = run(tmp_path, "schmidt", {"jsa": str(out / "jsa.csv")}, name="sc")
    assert code == 0
    code, direct = run(tmp_path, "schmidt", SMALL_GRID, name="direct")
    a, b = result(sc, "schmidt.json"), result(direct, "schmidt.json")
    assert a["purity"] == pytest.approx(b["purity"], rel=1e-12)
    assert a["g2"] - 1 == pytest.approx(a["indistinguishability"], abs=1e-12)


def test_domain_phase_matching_needs_seed_when_jittered(tmp_path):
    cfg = {"grid": {"n": 32}, "phase_matching": {"model": "domains", "jitter": 0.1}}
    assert run(tmp_path, "build-jsa", cfg, name="a")[0] == EXIT_CONFIG
    assert run(tmp_path, "build-jsa", cfg, ["--seed", "3"], name="b")[0] == 0


def test_optimize_pump_gaussian(tmp_path):
    code, out = run(tmp_path, "optimize-pump", {"grid": {"n": 128}, "optimize": {"n_coarse": 13}})
    assert code == 0
    res = result(out, "optimize.json")
    assert 0.7 < res["best_indistinguishability"] < 0.95
    assert res["best_bandwidth_nm"] > 0
    curve = qio.read_curve_csv(out / "optimize_curve.csv")
    assert curve["bandwidth_nm"].size == 13


def test_error_model_default(tmp_path):
    code, out = run(tmp_path, "error-model")
    assert code == 0
    res = result(out, "error_model.json")
    assert res["ratio"] == pytest.approx(1.0)
    assert res["sfg_error_probability"] == pytest.approx(1e-4)
    assert run(tmp_path, "error-model", {"error_model": {"pair_probability": 0}}, name="z")[0] == EXIT_CONFIG


def test_every_json_echoes_config(tmp_path):
    for cmd in ("error-model", "build-jsa"):
        _, out = run(tmp_path, cmd, SMALL_GRID if cmd == "build-jsa" else None, name=cmd)
        for f in out.glob("*.json"):
            meta = json.loads(f.read_text())
            assert meta["command"] == cmd
            assert "crystal" in meta["config"]
            assert sorted(p.name for p in out.iterdir()) == meta["files"]


def test_argparse_rejects_unknown_format(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["error-model", "--format", "png"])
    assert exc.value.code == 2
