"""
Schmidt decomposition of joint spectra, purity metrics and pump-bandwidth optimisation.

On a uniform grid the singular values of the amplitude matrix are the Schmidt
coefficients up to a common factor, which the normalisation removes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dispersion import bandwidth_nm_to_omega, omega_to_nm
from .joint_spectrum import (
    GaussianPump,
    RectangularPump,
    phase_matching_on_grid,
    pump_amplitude,
)

TRUNCATION = 1e-8


@dataclass(frozen=True)
class SchmidtResult:
    coefficients: np.ndarray   # lambda_n, descending, sum lambda_n^2 = 1 (before truncation)
    purity: float
    schmidt_number: float
    n_modes: int               # grid rank bound (min of matrix dims)

    @property
    def indistinguishability(self):
        return self.purity

    @property
    def retained_modes(self):
        return int(self.coefficients.size)

    def as_dict(self):
        return {
            "coefficients": [float(v) for v in self.coefficients],
            "purity": self.purity,
            "schmidt_number": self.schmidt_number,
            "indistinguishability": self.indistinguishability,
            "g2": 1.0 + self.purity,
            "retained_modes": self.retained_modes,
        }


def schmidt_decompose(js):
    amp = np.asarray(js.amplitude if hasattr(js, "amplitude") else js)
    if not np.any(amp):
        raise ValueError("cannot decompose an all-zero joint spectrum")
    s = np.linalg.svd(amp, compute_uv=False)
    lam = s / np.sqrt(np.sum(s * s))
    p = lam * lam
    purity = float(np.sum(p * p))
    return SchmidtResult(lam[lam >= TRUNCATION], purity, 1.0 / purity, int(min(amp.shape)))


def indistinguishability(js):
    return schmidt_decompose(js).purity


def g2_from_jsa(js):
    """Unheralded g2 of one arm: 1 + purity."""
    return 1.0 + schmidt_decompose(js).purity


# ---------------------------------------------------------------------------
# pump bandwidth optimisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BandwidthScan:
    shape: str
    bandwidth_nm: np.ndarray
    indistinguishability: np.ndarray
    best_bandwidth_nm: float
    best_indistinguishability: float
    pump_center_nm: float
    evaluations: int

    def as_dict(self):
        return {
            "shape": self.shape,
            "pump_center_nm": self.pump_center_nm,
            "bandwidth_nm": [float(v) for v in self.bandwidth_nm],
            "indistinguishability": [float(v) for v in self.indistinguishability],
            "best_bandwidth_nm": self.best_bandwidth_nm,
            "best_indistinguishability": self.best_indistinguishability,
            "evaluations": self.evaluations,
        }


def make_pump(shape, center, bandwidth):
    """Pump envelope from a shape name; ``bandwidth`` is sigma (gaussian) or full width (rectangular), rad/s."""
    if shape == "gaussian":
        return GaussianPump(center, bandwidth)
    if shape == "rectangular":
        return RectangularPump(center, bandwidth)
    raise ValueError(f"unknown pump shape {shape!r}; expected 'gaussian' or 'rectangular'")


def optimize_pump_bandwidth(crystal, pm, shape, bandwidth_range_nm, grid, n_coarse=25,
                            xtol_nm=1e-3, include_phase=False, workers=None):
    """Sweep the pump bandwidth and refine the purity maximum.

    The pump is centred on ``grid.pump_center``. Bandwidths are given in nm at
    the pump wavelength: the Gaussian 1/e amplitude half-width, or the full
    width of the rectangle. Coarse log-spaced sweep, then golden-section
    refinement between the neighbours of the best coarse point.
    """
    lo, hi = (float(v) for v in bandwidth_range_nm)
    if not 0 < lo <= hi:
        raise ValueError("bandwidth range must be positive with min <= max")
    if lo < hi and n_coarse < 8:
        raise ValueError("need at least 8 coarse bandwidth samples")
    center_nm = float(omega_to_nm(grid.pump_center))
    phi_pm = _phase_matching_cache(crystal, pm, grid, include_phase)

    def purity_at(bw_nm):
        pump = make_pump(shape, grid.pump_center, bandwidth_nm_to_omega(bw_nm, center_nm))
        return _purity_with_cached_pm(pump, grid, phi_pm)

    coarse = np.array([lo]) if lo == hi else np.geomspace(lo, hi, n_coarse)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            values = np.array(list(ex.map(purity_at, coarse)))
    else:
        values = np.array([purity_at(b) for b in coarse])
    evaluations = coarse.size

    j = int(np.argmax(values))
    best_bw, best_i = float(coarse[j]), float(values[j])
    if coarse.size > 1:
        a = float(coarse[max(j - 1, 0)])
        b = float(coarse[min(j + 1, coarse.size - 1)])
        samples = _golden_section_max(purity_at, a, b, xtol_nm)
        evaluations += len(samples)
        for bw, val in samples:
            if val > best_i or (val == best_i and bw < best_bw):
                best_bw, best_i = bw, val

    order = np.argsort(coarse)
    return BandwidthScan(shape, coarse[order], values[order], best_bw, best_i, center_nm, evaluations)


def _golden_section_max(fn, a, b, xtol):
    """Golden-section search for a maximum on [a, b]; returns every (x, f(x)) sampled."""
    invphi = (np.sqrt(5.0) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    samples = [(c, fc), (d, fd)]
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
            samples.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
            samples.append((d, fd))
    return [(float(x), float(v)) for x, v in samples]


def _phase_matching_cache(crystal, pm, grid, include_phase):
    ws, wi = grid.mesh()
    return phase_matching_on_grid(crystal, pm, ws, wi, include_phase)


def _purity_with_cached_pm(pump, grid, phi):
    ws, wi = grid.mesh()
    amp = pump_amplitude(pump, ws + wi) * phi
    if not np.any(amp):
        return 0.0
    return schmidt_decompose(amp).purity


# ---------------------------------------------------------------------------
# separation-error model for g2 and SFG measurements
# ---------------------------------------------------------------------------

def coincidence_error_ratio(pair_probability, separation_error):
    """(p R_e) / p^2: spurious signal-idler coincidences relative to genuine double pairs."""
    p, re = float(pair_probability), float(separation_error)
    if not 0 < p <= 1:
        raise ValueError("pair probability must lie in (0, 1]")
    if not 0 <= re <= 1:
        raise ValueError("separation error must lie in [0, 1]")
    return re / p


def sfg_error_probability(separation_error):
    """Both input beams mis-prepared: R_e^2."""
    re = float(separation_error)
    if not 0 <= re <= 1:
        raise ValueError("separation error must lie in [0, 1]")
    return re * re
