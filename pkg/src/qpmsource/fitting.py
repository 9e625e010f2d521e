"""
Recover crystal parameters from phase-matching scans by nonlinear least squares.

The objective is sum (y - a * model(p) - b)^2 on peak-normalised data, where the
amplitude a and background b are solved in closed form for every shape
parameter point p. The shape parameters (period, length, duty) are searched with
a coarse multi-start grid followed by bounded Nelder-Mead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize

from .dispersion import CrystalSpec, nm_to_omega, omega_to_nm
from .joint_spectrum import DomainPoling, JointSpectrum, jsi, phase_matching_on_grid

SHAPE_PARAMETERS = ("period_um", "length_mm", "duty")
KINDS = ("antidiagonal", "degenerate", "map")
MODELS = ("uniform", "domains")


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cross sections
# ---------------------------------------------------------------------------

def antidiagonal_idler_nm(signal_nm, pump_nm):
    """Idler wavelength satisfying 1/lambda_s + 1/lambda_i = 1/lambda_p."""
    return 1.0 / (1.0 / pump_nm - 1.0 / np.asarray(signal_nm, dtype=float))


def anticorrelated_cross_section(data, pump_nm=790.0, values="expected"):
    """Sample a 2-D spectrum along the energy-conserving line by bilinear interpolation.

    ``data`` is a ScanResult, a JointSpectrum (its JSI is used), or a bare matrix
    indexed [signal, idler] with ``data = (signal_nm, idler_nm, matrix)``.
    Returns ``(signal_nm, intensity)`` sampled at the signal-axis nodes whose
    partner idler falls inside the idler axis.
    """
    if isinstance(data, JointSpectrum):
        ws, wi = data.signal_omega, data.idler_omega
        mat = jsi(data)
        wp = float(nm_to_omega(pump_nm))
        keep = (wp - ws >= wi[0]) & (wp - ws <= wi[-1])
        if not np.any(keep):
            raise ValueError(f"the {pump_nm} nm energy-conservation line misses the spectrum")
        interp = RegularGridInterpolator((ws, wi), mat, method="linear")
        pts = np.stack([ws[keep], wp - ws[keep]], axis=-1)
        sig_nm = omega_to_nm(ws[keep])
        out = interp(pts)
        order = np.argsort(sig_nm)
        return sig_nm[order], out[order]

    if hasattr(data, "axis1_nm"):
        a1, a2 = data.axis1_nm, data.axis2_nm
        if a2 is None:
            raise ValueError("cross sections need a two-dimensional scan")
        mat = data.expected if values == "expected" else data.counts
        if mat is None:
            raise ValueError(f"scan has no {values!r} matrix")
    else:
        a1, a2, mat = data
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    mat = np.asarray(mat, dtype=float)
    if a1[0] > a1[-1]:
        a1, mat = a1[::-1], mat[::-1]
    if a2[0] > a2[-1]:
        a2, mat = a2[::-1], mat[:, ::-1]
    idler = antidiagonal_idler_nm(a1, pump_nm)
    keep = (idler >= a2[0]) & (idler <= a2[-1]) & (a1 > pump_nm)
    if not np.any(keep):
        raise ValueError(f"the {pump_nm} nm energy-conservation line misses the scan region")
    interp = RegularGridInterpolator((a1, a2), mat, method="linear")
    return a1[keep], interp(np.stack([a1[keep], idler[keep]], axis=-1))


# ---------------------------------------------------------------------------
# problem / result
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FitProblem:
    """What to fit.

    kind:
      ``antidiagonal`` -- y(x) along the fixed-pump line, x = signal wavelength (nm)
      ``degenerate``   -- SHG sweep, x = fundamental wavelength (nm)
      ``map``          -- 2-D matrix y[i, j] on (x, x2) signal/idler wavelengths (nm)
    ``crystal`` supplies the fixed parameters (order, polarization, Sellmeier
    sets, grating sign) and the values of any shape parameter not listed in ``free``.
    """

    x_nm: np.ndarray
    y: np.ndarray
    crystal: CrystalSpec
    free: dict
    kind: str = "antidiagonal"
    model: str = "uniform"
    pump_nm: float = 790.0
    x2_nm: np.ndarray | None = None
    fit_scale: bool = True
    fit_background: bool = True
    grid_points: int = 5
    n_starts: int = 3
    max_evaluations: int = 100_000
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if not self.free:
            raise ValueError("at least one free parameter is required")
        for name, bounds in self.free.items():
            if name not in SHAPE_PARAMETERS:
                raise ValueError(f"unknown free parameter {name!r}; choose from {SHAPE_PARAMETERS}")
            lo, hi = (float(v) for v in bounds)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds for {name} must be finite with lower < upper")
        x = np.asarray(self.x_nm, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if self.kind == "map":
            if self.x2_nm is None or y.shape != (x.size, np.size(self.x2_nm)):
                raise ValueError("map fits need x2_nm and a matching 2-D observation matrix")
        elif y.shape != x.shape:
            raise ValueError("observations and x values differ in shape")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ValueError("observations must be finite and non-negative")
        if not np.any(y > 0):
            raise ValueError("observations are identically zero")
        object.__setattr__(self, "x_nm", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "free", {k: (float(v[0]), float(v[1])) for k, v in self.free.items()})

    @property
    def names(self):
        return tuple(self.free)

    @property
    def normalized_y(self):
        return self.y / self.y.max()


@dataclass(frozen=True)
class FitResult:
    parameters: dict
    residual: float
    evaluations: int
    converged: bool
    sensitivity: dict
    scale: float
    background: float
    message: str = ""
    max_evaluations: int = 100_000

    def as_dict(self):
        return {
            "parameters": dict(self.parameters),
            "residual": self.residual,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "sensitivity": dict(self.sensitivity),
            "scale": self.scale,
            "background": self.background,
            "message": self.message,
        }


# ---------------------------------------------------------------------------
# model + objective
# ---------------------------------------------------------------------------

def model_curve(problem, params):
    """|phi|^2 of the model crystal at ``params`` on the observation support."""
    crystal = problem.crystal.with_params(**params) if params else problem.crystal
    pm = DomainPoling.from_crystal(crystal) if problem.model == "domains" else None
    if problem.kind == "antidiagonal":
        ws = nm_to_omega(problem.x_nm)
        wi = nm_to_omega(problem.pump_nm) - ws
    elif problem.kind == "degenerate":
        ws = wi = nm_to_omega(problem.x_nm)
    else:
        ws, wi = np.meshgrid(nm_to_omega(problem.x_nm), nm_to_omega(problem.x2_nm), indexing="ij")
    return np.abs(phase_matching_on_grid(crystal, pm, ws, wi)) ** 2


def _linear_solve(y, m, fit_scale, fit_background):
    y = y.ravel()
    m = m.ravel()
    if fit_scale and fit_background:
        mc = m - m.mean()
        den = float(mc @ mc)
        a = float(mc @ (y - y.mean())) / den if den > 0 else 0.0
        b = float(y.mean() - a * m.mean())
    elif fit_scale:
        den = float(m @ m)
        a, b = (float(m @ y) / den if den > 0 else 0.0), 0.0
    elif fit_background:
        a, b = 1.0, float(np.mean(y - m))
    else:
        a, b = 1.0, 0.0
    r = y - a * m - b
    return float(r @ r), a, b


class _Objective:
    def __init__(self, problem):
        self.problem = problem
        self.y = problem.normalized_y
        self.lo = np.array([problem.free[n][0] for n in problem.names])
        self.hi = np.array([problem.free[n][1] for n in problem.names])
        self.evaluations = 0

    def params(self, u):
        p = self.lo + np.clip(u, 0.0, 1.0) * (self.hi - self.lo)
        return {n: float(v) for n, v in zip(self.problem.names, p)}

    def full(self, params):
        self.evaluations += 1
        m = model_curve(self.problem, params)
        ssr, a, b = _linear_solve(self.y, m, self.problem.fit_scale, self.problem.fit_background)
        if not np.isfinite(ssr):
            raise FitError(f"non-finite objective at {params}")
        return ssr, a, b

    def __call__(self, u):
        return self.full(self.params(u))[0]


def fit_crystal(problem):
    obj = _Objective(problem)
    k = len(problem.names)
    cap = problem.max_evaluations

    # coarse grid, ranked by (residual, parameters) for a deterministic tie-break
    axis = np.linspace(0.0, 1.0, problem.grid_points)
    scored = []
    for u in itertools.product(axis, repeat=k):
        u = np.array(u)
        scored.append((obj(u), tuple(obj.params(u).values()), u))
    scored.sort(key=lambda t: (t[0], t[1]))

    best = None
    converged_any = False
    message = ""
    for f0, _, u0 in scored[: max(1, problem.n_starts)]:
        remaining = cap - obj.evaluations
        if remaining <= k + 1:
            message = "evaluation cap reached"
            break
        step = 0.5 / max(problem.grid_points - 1, 1)
        simplex = [u0]
        for i in range(k):
            v = u0.copy()
            v[i] = v[i] + step if v[i] + step <= 1.0 else v[i] - step
            simplex.append(v)
        res = minimize(obj, u0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * k,
                       options={"initial_simplex": np.array(simplex), "xatol": 1e-10,
                                "fatol": 1e-16, "maxfev": remaining, "adaptive": k > 2})
        cand = (float(res.fun), tuple(obj.params(res.x).values()), np.clip(res.x, 0, 1), bool(res.success))
        if best is None or (cand[0], cand[1]) < (best[0], best[1]):
            best = cand
        converged_any = converged_any or cand[3]
        if not res.success:
            message = str(res.message)

    if best is None:
        f0, key, u0 = scored[0]
        best = (f0, key, u0, False)
    params = obj.params(best[2])
    ssr, a, b = obj.full(params)
    converged = best[3] and obj.evaluations < cap
    if converged:
        message = "converged"
    elif not message:
        message = f"stopped at the evaluation cap ({cap})"
    sens = _curvature(obj, params)
    return FitResult(params, ssr, obj.evaluations, converged, sens, a, b, message, cap)


def _curvature(obj, params, rel_step=1e-4):
    """Diagonal of the objective Hessian by central differences (physical units)."""
    out = {}
    f0 = obj.full(params)[0]
    for n in obj.problem.names:
        lo, hi = obj.problem.free[n]
        h = rel_step * (hi - lo)
        up = dict(params, **{n: min(params[n] + h, hi)})
        dn = dict(params, **{n: max(params[n] - h, lo)})
        hu, hd = up[n] - params[n], params[n] - dn[n]
        if hu <= 0 or hd <= 0:
            out[n] = float("nan")
            continue
        fu, fd = obj.full(up)[0], obj.full(dn)[0]
        out[n] = float(2 * (hd * fu + hu * fd - (hu + hd) * f0) / (hu * hd * (hu + hd)))
    return out


def fit_report(result):
    lines = [
        "crystal fit",
        f"converged: {'true' if result.converged else 'false'}",
        f"evaluations: {result.evaluations}",
        f"residual (sum of squares): {result.residual:.6e}",
        f"amplitude scale: {result.scale:.9g}",
        f"background: {result.background:.9g}",
        f"{'parameter':<12}{'value':>18}{'curvature':>16}",
    ]
    for name in sorted(result.parameters):
        lines.append(f"{name:<12}{result.parameters[name]:>18.9f}{result.sensitivity.get(name, float('nan')):>16.6e}")
    if not result.converged:
        lines.append(f"note: {result.message}; evaluation cap {result.max_evaluations}")
    return "\n".join(lines) + "\n"
