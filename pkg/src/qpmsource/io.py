"""
File formats: matrix/curve CSV, JSON sidecars and small self-contained SVG plots.

Matrix CSV layout (shared by scans and joint spectra): the first row holds the
column (idler / axis-2) wavelengths in nm after a corner label, the first column
holds the row (signal / axis-1) wavelengths in nm. Complex cells are written as
a quoted ``"re,im"`` pair. UTF-8, LF line endings, '.' decimal separator.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .dispersion import nm_to_omega, omega_to_nm
from .joint_spectrum import JointSpectrum

CORNER = "signal_nm\\idler_nm"


def fmt(v):
    """Shortest round-trip text for a number."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == 0:
        return "0"
    return repr(v)


def fmt_cell(v):
    if np.iscomplexobj(v):
        return f"{fmt(v.real)},{fmt(v.imag)}"
    return fmt(v)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def matrix_csv_text(row_nm, col_nm, matrix, corner=CORNER):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([corner] + [fmt(v) for v in col_nm])
    matrix = np.asarray(matrix)
    for r, row in zip(row_nm, matrix):
        w.writerow([fmt(r)] + [fmt_cell(v) for v in row])
    return buf.getvalue()


def _parse_cell(text):
    if "," in text:
        re_, im_ = text.split(",")
        return complex(float(re_), float(im_))
    return float(text)


def read_matrix_csv(path):
    """Return (row_nm, col_nm, matrix); matrix is complex if any cell is a re,im pair."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or len(rows[0]) < 2:
        raise ValueError(f"{path}: not a matrix CSV")
    cols = np.array([float(v) for v in rows[0][1:]])
    row_nm = np.array([float(r[0]) for r in rows[1:]])
    cells = [[_parse_cell(v) for v in r[1:]] for r in rows[1:]]
    is_complex = any(isinstance(v, complex) for r in cells for v in r)
    mat = np.array(cells, dtype=complex if is_complex else float)
    if mat.shape != (row_nm.size, cols.size):
        raise ValueError(f"{path}: ragged matrix")
    return row_nm, cols, mat


def curve_csv_text(columns):
    """``columns`` is an ordered mapping name -> 1-D array."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*arrays):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_curve_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: malformed curve CSV")
    return {name: data[:, i] for i, name in enumerate(header)}


def json_text(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# joint spectra
# ---------------------------------------------------------------------------

def jsa_files(js, provenance=""):
    """CSV text and JSON sidecar text for a JointSpectrum (axes in nm, ascending)."""
    sig_nm, idl_nm = js.signal_nm, js.idler_nm
    si, ii = np.argsort(sig_nm), np.argsort(idl_nm)
    csv_text = matrix_csv_text(sig_nm[si], idl_nm[ii], js.amplitude[np.ix_(si, ii)])
    header = {
        "format": "qpmsource-jsa/1",
        "signal_center_nm": float(omega_to_nm(js.signal_center)),
        "idler_center_nm": float(omega_to_nm(js.idler_center)),
        "signal_center_rad_s": js.signal_center,
        "idler_center_rad_s": js.idler_center,
        "normalized": js.normalized,
        "shape": list(js.amplitude.shape),
        "provenance": provenance,
        "metadata": js.metadata,
    }
    return csv_text, json_text(header)


def read_jsa(csv_path, sidecar_path=None):
    row_nm, col_nm, mat = read_matrix_csv(csv_path)
    header = {}
    if sidecar_path is None:
        guess = Path(csv_path).with_suffix(".json")
        sidecar_path = guess if guess.exists() else None
    if sidecar_path is not None:
        header = json.loads(Path(sidecar_path).read_text())
    ws, wi = nm_to_omega(row_nm), nm_to_omega(col_nm)
    si, ii = np.argsort(ws), np.argsort(wi)
    ws, wi = ws[si], wi[ii]
    mat = np.asarray(mat, dtype=complex)[np.ix_(si, ii)]
    ws0 = header.get("signal_center_rad_s", float(ws[ws.size // 2]))
    wi0 = header.get("idler_center_rad_s", float(wi[wi.size // 2]))
    # snap the nm round trip back onto an exactly uniform axis
    ws = np.linspace(ws[0], ws[-1], ws.size)
    wi = np.linspace(wi[0], wi[-1], wi.size)
    return JointSpectrum(ws - ws0, wi - wi0, ws0, wi0, mat, bool(header.get("normalized", False)),
                         dict(header.get("metadata", {})))


# ---------------------------------------------------------------------------
# atomic output
# ---------------------------------------------------------------------------

def atomic_write_text(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out_dir, files):
    """Write ``{name: text}`` into ``out_dir``; every file goes through temp + rename."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        atomic_write_text(out_dir / name, files[name])
        written.append(out_dir / name)
    return written


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _color(t):
    # linear dark-blue -> yellow ramp
    t = min(max(float(t), 0.0), 1.0)
    r = int(round(20 + t * (250 - 20)))
    g = int(round(30 + t * (230 - 30)))
    b = int(round(110 + t * (40 - 110)))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(row_nm, col_nm, matrix, title="", max_cells=160):
    """Heatmap with rows on the vertical axis; large matrices are block-averaged."""
    mat = np.asarray(np.abs(matrix) if np.iscomplexobj(matrix) else matrix, dtype=float)
    row_nm = np.asarray(row_nm, dtype=float)
    col_nm = np.asarray(col_nm, dtype=float)
    fr = int(np.ceil(mat.shape[0] / max_cells))
    fc = int(np.ceil(mat.shape[1] / max_cells))
    nr, nc = mat.shape[0] // fr, mat.shape[1] // fc
    mat = mat[: nr * fr, : nc * fc].reshape(nr, fr, nc, fc).mean(axis=(1, 3))
    lo, hi = float(mat.min()), float(mat.max())
    scale = (mat - lo) / (hi - lo) if hi > lo else np.zeros_like(mat)
    W, H, ml, mb, mt = 420, 420, 70, 50, 30
    cw, ch = (W - ml - 10) / nc, (H - mb - mt) / nr
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
             f'<text x="{W / 2:.1f}" y="18" text-anchor="middle">{title}</text>']
    for i in range(nr):
        y = mt + (nr - 1 - i) * ch
        for j in range(nc):
            parts.append(f'<rect x="{ml + j * cw:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" '
                         f'height="{ch + 0.05:.2f}" fill="{_color(scale[i, j])}"/>')
    parts.append(f'<text x="{ml + (W - ml - 10) / 2:.1f}" y="{H - 12}" text-anchor="middle">'
                 f'idler / axis 2 (nm): {col_nm[0]:.2f} - {col_nm[-1]:.2f}</text>')
    parts.append(f'<text x="16" y="{mt + (H - mb - mt) / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {mt + (H - mb - mt) / 2:.1f})">'
                 f'signal / axis 1 (nm): {row_nm[0]:.2f} - {row_nm[-1]:.2f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def curve_svg(x, ys, xlabel="wavelength (nm)", ylabel="", title="", log=False):
    """Line plot of one or more curves sharing ``x``. ``ys`` maps label -> values."""
    x = np.asarray(x, dtype=float)
    W, H, ml, mb, mt, mr = 520, 340, 70, 50, 30, 20
    series = {k: np.asarray(v, dtype=float) for k, v in ys.items()}
    if log:
        floor = max(min(float(v[v > 0].min()) for v in series.values() if np.any(v > 0)), 1e-300)
        series = {k: np.log10(np.clip(v, floor, None)) for k, v in series.items()}
    lo = min(float(v.min()) for v in series.values())
    hi = max(float(v.max()) for v in series.values())
    if hi <= lo:
        hi = lo + 1.0
    x0, x1 = float(x.min()), float(x.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    px = lambda v: ml + (v - x0) / (x1 - x0) * (W - ml - mr)
    py = lambda v: H - mb - (v - lo) / (hi - lo) * (H - mb - mt)
    palette = ["#1f3a93", "#c0392b", "#27ae60", "#8e44ad", "#d35400"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
             f'<text x="{W / 2:.1f}" y="18" text-anchor="middle">{title}</text>',
             f'<rect x="{ml}" y="{mt}" width="{W - ml - mr}" height="{H - mb - mt}" '
             f'fill="none" stroke="#444"/>']
    for n, (label, v) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, v))
        color = palette[n % len(palette)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        parts.append(f'<text x="{ml + 8}" y="{mt + 14 + 13 * n}" fill="{color}">{label}</text>')
    parts.append(f'<text x="{ml}" y="{H - 30}">{x0:.2f}</text>')
    parts.append(f'<text x="{W - mr}" y="{H - 30}" text-anchor="end">{x1:.2f}</text>')
    parts.append(f'<text x="{ml + (W - ml - mr) / 2:.1f}" y="{H - 12}" text-anchor="middle">{xlabel}</text>')
    ylab = f"log10 {ylabel}" if log else ylabel
    parts.append(f'<text x="16" y="{H / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {H / 2:.1f})">{ylab}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
