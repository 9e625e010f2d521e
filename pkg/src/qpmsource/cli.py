"""
Command-line front end.

    qpmsource simulate-sfg  [--config PATH] [--seed N] [--out DIR] [--format csv|json|svg ...]
    qpmsource simulate-shg  ...
    qpmsource build-jsa     ...
    qpmsource fit           ...
    qpmsource schmidt       ...
    qpmsource optimize-pump ...
    qpmsource error-model   ...

A run is described by one JSON or TOML file; flags override the file. Every
command writes a JSON file holding its results and the fully resolved config,
so any output set can be regenerated from that file alone. Exit codes: 0 on
success, 2 for configuration errors, 3 for numerical or domain errors.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as qio
from .dispersion import (
    CrystalSpec,
    NoDegeneratePointError,
    PolarizationConfig,
    SellmeierRangeError,
    _load_toml,
    auto_grating_sign,
    bandwidth_nm_to_omega,
    load_sellmeier,
    nm_to_omega,
)
from .fitting import FitError, FitProblem, fit_crystal, fit_report, model_curve
from .joint_spectrum import (
    DomainPoling,
    FrequencyGrid,
    TabulatedPhaseMatching,
    build_jsa,
    jsi,
)
from .scan import (
    DetectorModel,
    ScanConfig,
    ShgProcess,
    default_shg_processes,
    simulate_sfg_scan,
    simulate_shg_scan,
    snr,
)
from .schmidt import (
    coincidence_error_ratio,
    make_pump,
    optimize_pump_bandwidth,
    schmidt_decompose,
    sfg_error_probability,
)


COMMANDS = ("simulate-sfg", "simulate-shg", "build-jsa", "fit", "schmidt",
            "optimize-pump", "error-model")
FORMATS = ("csv", "json", "svg")
BUILTIN = "builtin:"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# defaults
# ---------------------------------------------------------------------------

CRYSTAL_PRESETS = {
    "design": {"period_um": 46.1, "length_mm": 30.0, "duty": 0.5, "order": 1,
               "polarization": "type-ii"},
    "fitted": {"period_um": 46.125, "length_mm": 29.0, "duty": 0.5, "order": 1,
               "polarization": "type-ii"},
}

COMMON = {"seed": None, "out": ".", "format": list(FORMATS), "sellmeier": None,
          "crystal": {"preset": "fitted"}}

GRID = {"signal_nm": 1580.0, "idler_nm": None, "span_nm": 10.0, "n": 251}
PHASE_MATCHING = {"model": "uniform", "jitter": 0.0, "intensity_csv": None}

DEFAULTS = {
    "simulate-sfg": {
        "seed": 1,
        "scan": {"signal_nm": [1575.0, 1585.0], "idler_nm": [1575.0, 1585.0], "step_nm": 0.04,
                 "calibration": 1e6, "n1": 1.0, "n2": 1.0, "sample": True},
        "detector": {"efficiency": 1.0, "dark_rate": 100.0, "integration_time": 1.0},
    },
    "simulate-shg": {
        "seed": 1,
        "shg": {"range_nm": [1480.0, 1590.0], "step_nm": 0.04, "calibration": 1e6,
                "n1": 1.0, "n2": 1.0, "sample": True, "duty": 0.47, "processes": "default"},
        "detector": {"efficiency": 1.0, "dark_rate": 100.0, "integration_time": 1.0},
    },
    "build-jsa": {
        "grid": GRID,
        "pump": {"shape": "gaussian", "center_nm": None, "bandwidth_nm": 0.3},
        "phase_matching": PHASE_MATCHING,
        "include_phase": False,
        "normalize": True,
    },
    "schmidt": {
        "jsa": None,
        "grid": GRID,
        "pump": {"shape": "gaussian", "center_nm": None, "bandwidth_nm": 0.3},
        "phase_matching": PHASE_MATCHING,
        "include_phase": False,
    },
    "optimize-pump": {
        "grid": GRID,
        "phase_matching": PHASE_MATCHING,
        "include_phase": False,
        "optimize": {"shape": "gaussian", "bandwidth_nm": [0.02, 5.0], "n_coarse": 25,
                     "xtol_nm": 1e-3},
    },
    "fit": {
        "crystal": {"preset": "design"},
        "fit": {"observations": BUILTIN + "cross_section_synthetic.csv", "kind": "antidiagonal",
                "model": "uniform", "pump_nm": 790.0, "x_column": None, "y_column": None,
                "free": {"period_um": [45.9, 46.3], "length_mm": [28.0, 31.0]},
                "fit_scale": True, "fit_background": True, "grid_points": 5,
                "n_starts": 3, "max_evaluations": 100000},
    },
    "error-model": {
        "error_model": {"pair_probability": 0.01, "separation_error": 0.01,
                        "curve_pair_probability": [1e-4, 1.0], "curve_points": 41},
    },
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def default_config(command):
    return _merge(COMMON, DEFAULTS[command])


# ---------------------------------------------------------------------------
# config loading / resolution
# ---------------------------------------------------------------------------

def read_config_file(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix.lower() == ".toml":
            return _load_toml(path)
        return json.loads(path.read_text(encoding="utf-8"))
    except (ValueError, OSError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def resolve_config(command, file_cfg=None, base_dir=".", seed=None, out=None, formats=None):
    """Defaults <- file <- flags. Relative paths are taken relative to ``base_dir``."""
    cfg = default_config(command)
    if file_cfg:
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a table/object at top level")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg = _merge(cfg, file_cfg)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = out
    if formats:
        cfg["format"] = sorted(set(formats))
    bad = set(cfg["format"]) - set(FORMATS)
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}")
    if cfg["seed"] is not None and (not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        raise ConfigError("seed must be a non-negative integer")

    base = Path(base_dir)
    for key in ("sellmeier",):
        cfg[key] = _resolve_path(cfg[key], base)
    if isinstance(cfg["crystal"], str):
        cfg["crystal"] = _read_crystal_file(_resolve_path(cfg["crystal"], base))
    cfg["crystal"] = _resolve_crystal(cfg["crystal"], cfg["sellmeier"])
    pm = cfg.get("phase_matching")
    if pm is not None:
        pm["intensity_csv"] = _resolve_path(pm.get("intensity_csv"), base)
    if command == "fit":
        cfg["fit"]["observations"] = _resolve_path(cfg["fit"]["observations"], base)
    if command == "schmidt" and cfg["jsa"]:
        cfg["jsa"] = _resolve_path(cfg["jsa"], base)
    return cfg


def _resolve_path(value, base):
    if value is None or str(value).startswith(BUILTIN):
        return value
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"file not found: {p}")
    return str(p)


def _read_crystal_file(path):
    cfg = read_config_file(path)
    return cfg.get("crystal", cfg)


def _sellmeier(path):
    try:
        return load_sellmeier(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load Sellmeier data {path}: {exc}") from exc


def _resolve_crystal(spec, sellmeier_path):
    """Expand a crystal table (optionally naming a preset) into explicit fields."""
    if not isinstance(spec, dict):
        raise ConfigError("crystal must be a preset table or a file path")
    spec = dict(spec)
    preset = spec.pop("preset", None)
    if preset is not None:
        if preset not in CRYSTAL_PRESETS:
            raise ConfigError(f"unknown crystal preset {preset!r}; choose from {sorted(CRYSTAL_PRESETS)}")
        spec = {**CRYSTAL_PRESETS[preset], **spec}
    required = ("period_um", "length_mm")
    missing = [k for k in required if k not in spec]
    if missing:
        raise ConfigError(f"crystal is missing {missing}")
    spec.setdefault("duty", 0.5)
    spec.setdefault("order", 1)
    spec.setdefault("polarization", "type-ii")
    spec.setdefault("grating_sign", "auto")
    allowed = {"period_um", "length_mm", "duty", "order", "polarization", "grating_sign"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown crystal fields {sorted(unknown)}")
    crystal = build_crystal(spec, _sellmeier(sellmeier_path))
    spec["grating_sign"] = crystal.grating_sign
    return spec


def build_crystal(spec, sellmeier):
    try:
        pol = spec["polarization"]
        pol = (PolarizationConfig.named(pol) if isinstance(pol, str)
               else PolarizationConfig(*pol))
        sign = spec.get("grating_sign", "auto")
        crystal = CrystalSpec(float(spec["period_um"]), float(spec["length_mm"]),
                              float(spec["duty"]), int(spec["order"]), pol, sellmeier,
                              1 if sign == "auto" else int(sign))
        if sign == "auto":
            crystal = crystal.with_params(grating_sign=auto_grating_sign(crystal))
        return crystal
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid crystal: {exc}") from exc


# ---------------------------------------------------------------------------
# shared builders
# ---------------------------------------------------------------------------

def _crystal(cfg):
    return build_crystal(cfg["crystal"], _sellmeier(cfg["sellmeier"]))


def _detector(d):
    try:
        return DetectorModel(float(d["efficiency"]), float(d["dark_rate"]),
                             float(d["integration_time"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid detector: {exc}") from exc


def _grid(g):
    try:
        if int(g["n"]) < 2:
            raise ValueError("grid needs at least two points per axis")
        return FrequencyGrid.from_wavelengths(float(g["signal_nm"]),
                                              None if g["idler_nm"] is None else float(g["idler_nm"]),
                                              float(g["span_nm"]), int(g["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc


def _phase_matching(cfg, crystal):
    pm = cfg["phase_matching"]
    model = pm["model"]
    if model == "uniform":
        return None
    if model == "domains":
        jitter = float(pm["jitter"])
        if jitter > 0 and cfg["seed"] is None:
            raise ConfigError("domain jitter is random: a seed is required")
        return DomainPoling.from_crystal(crystal, jitter, np.random.default_rng(cfg["seed"]))
    if model == "tabulated":
        if not pm["intensity_csv"]:
            raise ConfigError("tabulated phase matching needs phase_matching.intensity_csv")
        try:
            row, col, mat = qio.read_matrix_csv(pm["intensity_csv"])
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return TabulatedPhaseMatching.from_intensity(row, col, np.real(mat), pm["intensity_csv"])
    raise ConfigError(f"unknown phase-matching model {model!r}")


def _pump(p, grid):
    center_nm = p["center_nm"]
    center = grid.pump_center if center_nm is None else float(nm_to_omega(center_nm))
    center_nm = float(qio.omega_to_nm(center))
    bw = float(p["bandwidth_nm"])
    if not bw > 0:
        raise ConfigError("pump bandwidth must be positive")
    try:
        return make_pump(p["shape"], center, bandwidth_nm_to_omega(bw, center_nm))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _range(pair, name):
    try:
        lo, hi = (float(v) for v in pair)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a [start, stop] pair") from exc
    return lo, hi


def _wants(cfg, fmt):
    return fmt in cfg["format"]


def _meta(command, cfg, results, files):
    # the output directory is left out so a run is byte-identical wherever it is written
    echo = {k: v for k, v in cfg.items() if k != "out"}
    return {"command": command, "config": echo, "results": results, "files": sorted(files)}


# ---------------------------------------------------------------------------
# commands: each returns {filename: text}
# ---------------------------------------------------------------------------

def cmd_simulate_sfg(cfg):
    s = cfg["scan"]
    crystal = _crystal(cfg)
    detector = _detector(cfg["detector"])
    if s["sample"] and cfg["seed"] is None:
        raise ConfigError("sampling needs a seed")
    try:
        sc = ScanConfig(_range(s["signal_nm"], "scan.signal_nm"), float(s["step_nm"]),
                        _range(s["idler_nm"], "scan.idler_nm"), None,
                        float(s["n1"]), float(s["n2"]), float(s["calibration"]),
                        cfg["seed"], bool(s["sample"]))
        sc.axes()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scan: {exc}") from exc
    res = simulate_sfg_scan(sc, crystal, detector)
    files = {}
    if _wants(cfg, "csv"):
        files["sfg_expected.csv"] = qio.matrix_csv_text(res.axis1_nm, res.axis2_nm, res.expected)
        if res.counts is not None:
            files["sfg_counts.csv"] = qio.matrix_csv_text(res.axis1_nm, res.axis2_nm, res.counts)
    if _wants(cfg, "svg"):
        phi2 = res.signal / (detector.efficiency * sc.calibration * sc.n1 * sc.n2 or 1.0)
        files["sfg_phi2.svg"] = qio.heatmap_svg(res.axis1_nm, res.axis2_nm, phi2,
                                                "|phi|^2 (SFG scan)")
    results = {"shape": list(res.expected.shape), "peak_rate": res.peak_rate,
               "snr_db": snr(res) if detector.dark_rate > 0 else None}
    files["sfg.json"] = qio.json_text(_meta("simulate-sfg", cfg, results, list(files) + ["sfg.json"]))
    return files


def _shg_processes(s, cfg):
    sm = _sellmeier(cfg["sellmeier"])
    if s["processes"] == "default":
        return default_shg_processes(float(s["duty"]), sm)
    if not isinstance(s["processes"], list) or not s["processes"]:
        raise ConfigError("shg.processes must be 'default' or a non-empty list")
    procs = []
    for i, p in enumerate(s["processes"]):
        spec = _resolve_crystal(p.get("crystal", {"preset": "fitted"}), cfg["sellmeier"])
        p["crystal"] = spec
        procs.append(ShgProcess(str(p.get("name", f"process {i + 1}")),
                                build_crystal(spec, sm), float(p.get("amplitude", 1.0))))
    return procs


def cmd_simulate_shg(cfg):
    s = cfg["shg"]
    detector = _detector(cfg["detector"])
    if s["sample"] and cfg["seed"] is None:
        raise ConfigError("sampling needs a seed")
    procs = _shg_processes(s, cfg)
    try:
        sc = ScanConfig(_range(s["range_nm"], "shg.range_nm"), float(s["step_nm"]), None, None,
                        float(s["n1"]), float(s["n2"]), float(s["calibration"]),
                        cfg["seed"], bool(s["sample"]))
        sc.axes()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sweep: {exc}") from exc
    res = simulate_shg_scan(sc, procs, detector)
    total = sum(res.components.values())
    files = {}
    if _wants(cfg, "csv"):
        cols = {"wavelength_nm": res.axis1_nm, "total": total}
        cols.update(res.components)
        cols["expected_with_dark"] = res.expected
        if res.counts is not None:
            cols["counts"] = res.counts
        files["shg.csv"] = qio.curve_csv_text(cols)
    if _wants(cfg, "svg"):
        files["shg.svg"] = qio.curve_svg(res.axis1_nm, {"total": total, **res.components},
                                         ylabel="rate (counts/s)", title="SHG sweep", log=True)
    peaks = {name: float(res.axis1_nm[int(np.argmax(c))]) for name, c in res.components.items()}
    results = {"points": int(res.axis1_nm.size), "peak_wavelength_nm": peaks,
               "peak_rate": res.peak_rate,
               "snr_db": snr(res) if detector.dark_rate > 0 else None}
    files["shg.json"] = qio.json_text(_meta("simulate-shg", cfg, results, list(files) + ["shg.json"]))
    return files


def _build(cfg):
    crystal = _crystal(cfg)
    grid = _grid(cfg["grid"])
    pm = _phase_matching(cfg, crystal)
    pump = _pump(cfg["pump"], grid)
    return build_jsa(pump, crystal, pm, grid, normalize=cfg.get("normalize", True),
                     include_phase=bool(cfg["include_phase"]))


def cmd_build_jsa(cfg):
    js = _build(cfg)
    files = {}
    csv_text, side = qio.jsa_files(js, provenance="qpmsource build-jsa")
    if _wants(cfg, "csv"):
        files["jsa.csv"] = csv_text
    if _wants(cfg, "svg"):
        si, ii = np.argsort(js.signal_nm), np.argsort(js.idler_nm)
        files["jsi.svg"] = qio.heatmap_svg(js.signal_nm[si], js.idler_nm[ii],
                                           jsi(js)[np.ix_(si, ii)], "joint spectral intensity")
    header = json.loads(side)
    header.update(_meta("build-jsa", cfg, {"norm": float(js.norm())}, list(files) + ["jsa.json"]))
    files["jsa.json"] = qio.json_text(header)
    return files


def cmd_schmidt(cfg):
    if cfg["jsa"]:
        try:
            js = qio.read_jsa(cfg["jsa"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read joint spectrum {cfg['jsa']}: {exc}") from exc
    else:
        js = _build(cfg)
    res = schmidt_decompose(js)
    files = {}
    if _wants(cfg, "csv"):
        files["schmidt_coefficients.csv"] = qio.curve_csv_text(
            {"mode": np.arange(res.coefficients.size), "coefficient": res.coefficients})
    if _wants(cfg, "svg"):
        files["schmidt.svg"] = qio.curve_svg(np.arange(res.coefficients.size),
                                             {"lambda_n": res.coefficients}, xlabel="mode",
                                             ylabel="coefficient", title="Schmidt spectrum", log=True)
    files["schmidt.json"] = qio.json_text(
        _meta("schmidt", cfg, res.as_dict(), list(files) + ["schmidt.json"]))
    return files


def cmd_optimize_pump(cfg):
    o = cfg["optimize"]
    crystal = _crystal(cfg)
    grid = _grid(cfg["grid"])
    pm = _phase_matching(cfg, crystal)
    if o["shape"] not in ("gaussian", "rectangular"):
        raise ConfigError(f"unknown pump shape {o['shape']!r}")
    bw = _range(o["bandwidth_nm"], "optimize.bandwidth_nm")
    if not 0 < bw[0] <= bw[1]:
        raise ConfigError("optimize.bandwidth_nm must be positive with min <= max")
    res = optimize_pump_bandwidth(crystal, pm, o["shape"], bw, grid, int(o["n_coarse"]),
                                  float(o["xtol_nm"]), bool(cfg["include_phase"]))
    files = {}
    if _wants(cfg, "csv"):
        files["optimize_curve.csv"] = qio.curve_csv_text(
            {"bandwidth_nm": res.bandwidth_nm, "indistinguishability": res.indistinguishability})
    if _wants(cfg, "svg"):
        files["optimize.svg"] = qio.curve_svg(res.bandwidth_nm, {o["shape"]: res.indistinguishability},
                                              xlabel="pump bandwidth (nm)",
                                              ylabel="indistinguishability",
                                              title="purity versus pump bandwidth")
    files["optimize.json"] = qio.json_text(
        _meta("optimize-pump", cfg, res.as_dict(), list(files) + ["optimize.json"]))
    return files


def _observations(f):
    src = f["observations"]
    try:
        if src.startswith(BUILTIN):
            name = src[len(BUILTIN):]
            ref = resources.files("qpmsource.data").joinpath(name)
            if not ref.is_file():
                raise ConfigError(f"no built-in data file {name!r}")
            with resources.as_file(ref) as p:
                return _read_observations(p, f)
        return _read_observations(Path(src), f)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read observations {src}: {exc}") from exc


def _read_observations(path, f):
    if f["kind"] == "map":
        row, col, mat = qio.read_matrix_csv(path)
        return row, np.real(mat), col
    cols = qio.read_curve_csv(path)
    names = list(cols)
    x = cols[f["x_column"] or names[0]]
    y = cols[f["y_column"] or names[1]]
    return x, y, None


def cmd_fit(cfg):
    f = cfg["fit"]
    crystal = _crystal(cfg)
    x, y, x2 = _observations(f)
    try:
        problem = FitProblem(x, y, crystal, dict(f["free"]), f["kind"], f["model"],
                             float(f["pump_nm"]), x2, bool(f["fit_scale"]),
                             bool(f["fit_background"]), int(f["grid_points"]),
                             int(f["n_starts"]), int(f["max_evaluations"]),
                             {"observations": f["observations"]})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid fit problem: {exc}") from exc
    res = fit_crystal(problem)
    files = {"fit_report.txt": fit_report(res)}
    model = res.scale * model_curve(problem, res.parameters) + res.background
    if _wants(cfg, "csv"):
        if problem.kind == "map":
            files["fit_model.csv"] = qio.matrix_csv_text(problem.x_nm, problem.x2_nm, model)
        else:
            files["fit_curve.csv"] = qio.curve_csv_text(
                {"x_nm": problem.x_nm, "observed": problem.normalized_y, "model": model})
    if _wants(cfg, "svg") and problem.kind != "map":
        files["fit.svg"] = qio.curve_svg(problem.x_nm, {"observed": problem.normalized_y,
                                                        "model": model},
                                         ylabel="normalized intensity", title="crystal fit")
    files["fit.json"] = qio.json_text(_meta("fit", cfg, res.as_dict(), list(files) + ["fit.json"]))
    return files


def cmd_error_model(cfg):
    e = cfg["error_model"]
    try:
        p, re = float(e["pair_probability"]), float(e["separation_error"])
        ratio = coincidence_error_ratio(p, re)
        sfg = sfg_error_probability(re)
        lo, hi = _range(e["curve_pair_probability"], "error_model.curve_pair_probability")
        ps = np.geomspace(lo, hi, int(e["curve_points"]))
        curve = np.array([coincidence_error_ratio(v, re) for v in ps])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid error model: {exc}") from exc
    files = {}
    if _wants(cfg, "csv"):
        files["error_model.csv"] = qio.curve_csv_text({"pair_probability": ps, "ratio": curve})
    if _wants(cfg, "svg"):
        files["error_model.svg"] = qio.curve_svg(np.log10(ps), {"ratio": curve},
                                                 xlabel="log10 pair probability",
                                                 ylabel="spurious / genuine", log=True,
                                                 title="separation-error ratio")
    results = {"pair_probability": p, "separation_error": re, "ratio": ratio,
               "sfg_error_probability": sfg}
    files["error_model.json"] = qio.json_text(
        _meta("error-model", cfg, results, list(files) + ["error_model.json"]))
    return files


HANDLERS = {
    "simulate-sfg": cmd_simulate_sfg,
    "simulate-shg": cmd_simulate_shg,
    "build-jsa": cmd_build_jsa,
    "fit": cmd_fit,
    "schmidt": cmd_schmidt,
    "optimize-pump": cmd_optimize_pump,
    "error-model": cmd_error_model,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="qpmsource",
                                     description="QPM photon-pair source modelling")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON or TOML run configuration")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--format", action="append", choices=FORMATS,
                       help="output format; repeat for several (default: all)")
    return parser


def run(command, cfg):
    """Run one command on a resolved config and write its outputs; returns the paths."""
    files = HANDLERS[command](cfg)
    out_dir = Path(cfg["out"])
    try:
        return qio.write_outputs(out_dir, files)
    except OSError as exc:
        raise ConfigError(f"cannot write to {out_dir}: {exc}") from exc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        file_cfg, base = None, Path(".")
        if args.config is not None:
            file_cfg = read_config_file(args.config)
            base = args.config.parent
        cfg = resolve_config(args.command, file_cfg, base, args.seed,
                             None if args.out is None else str(args.out), args.format)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            paths = run(args.command, cfg)
    except ConfigError as exc:
        print(f"qpmsource {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SellmeierRangeError, NoDegeneratePointError, FitError, ValueError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"qpmsource {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in paths:
        print(p)
    return EXIT_OK


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
