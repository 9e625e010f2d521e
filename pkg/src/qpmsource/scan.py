"""
Frequency-resolved SFG and wideband SHG scan simulation with photon-counting noise.

Rates are relative to a calibration constant: the detected count rate (counts/s)
for unit input rates, unit detection efficiency and |phi|^2 = 1. Counts are
Poisson draws from a counter-based generator keyed on (seed, grid index), so any
sub-block of a scan reproduces independently of evaluation order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .dispersion import NoDegeneratePointError, find_degenerate_point, nm_to_omega
from .joint_spectrum import phase_matching_on_grid

Rate = Union[float, Callable]


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dark_rate: float = 100.0          # counts/s
    integration_time: float = 1.0     # s per point

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ValueError("detection efficiency must lie in [0, 1]")
        if not self.dark_rate >= 0:
            raise ValueError("dark count rate must be non-negative")
        if not self.integration_time > 0:
            raise ValueError("integration time must be positive")

    def as_dict(self):
        return {"efficiency": self.efficiency, "dark_rate": self.dark_rate,
                "integration_time": self.integration_time}


def scan_axis(start_nm, stop_nm, step_nm):
    """Inclusive wavelength axis; the span must be a whole number of steps (to 1e-6)."""
    if not step_nm > 0:
        raise ValueError("scan step must be positive")
    n_float = (stop_nm - start_nm) / step_nm
    n = int(round(n_float))
    if n < 0 or abs(n - n_float) > 1e-6 * max(1.0, abs(n_float)):
        raise ValueError(f"range {start_nm}-{stop_nm} nm is not a whole number of {step_nm} nm steps")
    return start_nm + step_nm * np.arange(n + 1)


@dataclass(frozen=True)
class ScanConfig:
    """Wavelength scan. ``axis2_nm=None`` selects the diagonal (SHG, w1 = w2) mode."""

    axis1_nm: tuple = (1575.0, 1585.0)
    step1_nm: float = 0.04
    axis2_nm: tuple | None = (1575.0, 1585.0)
    step2_nm: float | None = None
    n1: Rate = 1.0
    n2: Rate = 1.0
    calibration: float = 1e6
    seed: int | None = None
    sample: bool = True

    @property
    def diagonal(self):
        return self.axis2_nm is None

    def axes(self):
        a1 = scan_axis(*self.axis1_nm, self.step1_nm)
        if self.diagonal:
            return a1, None
        return a1, scan_axis(*self.axis2_nm, self.step2_nm or self.step1_nm)

    def as_dict(self):
        def rate(v):
            return v if not callable(v) else getattr(v, "__name__", "callable")
        return {"axis1_nm": list(self.axis1_nm), "step1_nm": self.step1_nm,
                "axis2_nm": None if self.axis2_nm is None else list(self.axis2_nm),
                "step2_nm": self.step2_nm, "n1": rate(self.n1), "n2": rate(self.n2),
                "calibration": self.calibration, "seed": self.seed, "sample": self.sample}


@dataclass(frozen=True, eq=False)
class ScanResult:
    axis1_nm: np.ndarray
    axis2_nm: np.ndarray | None
    expected: np.ndarray                 # counts/s, dark counts included
    counts: np.ndarray | None            # integer counts per integration window
    detector: DetectorModel
    seed: int | None
    components: dict = field(default_factory=dict)   # SHG: name -> signal rate (no dark)
    config: dict = field(default_factory=dict)

    @property
    def signal(self):
        return self.expected - self.detector.dark_rate

    @property
    def peak_rate(self):
        return float(np.max(self.expected))


def _rate(value, wavelength_nm):
    if callable(value):
        return np.asarray(value(wavelength_nm), dtype=float)
    return float(value)


def sfg_expected_rate(omega_1, omega_2, crystal, calibration, n1=1.0, n2=1.0,
                      dark_rate=0.0, efficiency=1.0, pm=None, include_dark=True):
    """efficiency * calibration * N1 * N2 * |phi|^2 + dark, in counts/s."""
    phi = phase_matching_on_grid(crystal, pm, omega_1, omega_2)
    signal = efficiency * calibration * n1 * n2 * np.abs(phi) ** 2
    return signal + dark_rate if include_dark else signal


# ---------------------------------------------------------------------------
# counting noise
# ---------------------------------------------------------------------------

def _philox_key(seed):
    if seed is None:
        raise ValueError("a seed is required to sample counts")
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return seed % (1 << 128)


def keyed_poisson(seed, index, mean):
    """One Poisson draw from the stream keyed on (seed, index); index is an int tuple."""
    i = tuple(int(v) for v in index) + (0,) * (2 - len(index))
    counter = np.array([0, 0, i[0], i[1]], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=_philox_key(seed), counter=counter))
    return int(gen.poisson(mean))


def sample_counts(rates, integration_time, seed, offset=(0, 0)):
    """Poisson counts for a 1-D or 2-D array of rates; ``offset`` locates a sub-block."""
    rates = np.asarray(rates, dtype=float)
    means = rates * integration_time
    if np.any(means < 0) or not np.all(np.isfinite(means)):
        raise ValueError("Poisson means must be finite and non-negative")
    out = np.empty(means.shape, dtype=np.int64)
    if means.ndim == 1:
        for i, m in enumerate(means):
            out[i] = keyed_poisson(seed, (offset[0] + i, 0), m)
    elif means.ndim == 2:
        for i in range(means.shape[0]):
            for j in range(means.shape[1]):
                out[i, j] = keyed_poisson(seed, (offset[0] + i, offset[1] + j), means[i, j])
    else:
        raise ValueError("only 1-D and 2-D scans are supported")
    return out


# ---------------------------------------------------------------------------
# SFG
# ---------------------------------------------------------------------------

def simulate_sfg_scan(config, crystal, detector, seed=None, pm=None):
    """Two-laser SFG scan: axis 1 drives the signal mode, axis 2 the idler mode."""
    if config.diagonal:
        raise ValueError("diagonal configs are SHG sweeps; use simulate_shg_scan")
    seed = config.seed if seed is None else seed
    if config.sample and seed is None:
        raise ValueError("a seed is required when sampling is requested")
    a1, a2 = config.axes()
    w1, w2 = np.meshgrid(nm_to_omega(a1), nm_to_omega(a2), indexing="ij")
    n1 = _rate(config.n1, a1)
    n2 = _rate(config.n2, a2)
    if np.ndim(n1):
        n1 = n1[:, None]
    if np.ndim(n2):
        n2 = n2[None, :]
    expected = sfg_expected_rate(w1, w2, crystal, config.calibration, n1, n2,
                                 detector.dark_rate, detector.efficiency, pm)
    counts = sample_counts(expected, detector.integration_time, seed) if config.sample else None
    return ScanResult(a1, a2, expected, counts, detector, seed, {}, config.as_dict())


# ---------------------------------------------------------------------------
# SHG
# ---------------------------------------------------------------------------

def qpm_fourier_coefficient(order, duty):
    """|G_m(d)| = (2 / (m pi)) |sin(m pi d)|, the order-m grating strength."""
    m = int(order)
    if m < 1 or m != order:
        raise ValueError("QPM order must be a positive integer")
    if not 0 < duty < 1:
        raise ValueError("duty cycle must lie strictly between 0 and 1")
    if float(m * duty).is_integer():
        return 0.0  # sin(k pi) is not exactly zero in floating point
    return 2.0 / (m * np.pi) * abs(np.sin(m * np.pi * duty))


@dataclass(frozen=True, eq=False)
class ShgProcess:
    name: str
    crystal: object
    amplitude: float = 1.0

    @property
    def weight(self):
        return self.amplitude ** 2 * qpm_fourier_coefficient(self.crystal.order, self.crystal.duty) ** 2


def default_shg_processes(duty=0.47, sellmeier=None):
    """Type-II (m=1), Type-I (m=7) and Type-0 (m=2) at the fitted periods.

    Relative amplitudes are free parameters; these put the Type-I and Type-0
    peaks near 1e-3 of the Type-II weight at duty 0.47.
    """
    from .dispersion import TYPE_0, TYPE_I, CrystalSpec, fitted_crystal, load_sellmeier
    sm = sellmeier or load_sellmeier()
    t2 = fitted_crystal(sm).with_params(duty=duty)
    t1 = CrystalSpec(45.807, t2.length_mm, duty, 7, TYPE_I, sm, grating_sign=1)
    t0 = CrystalSpec(46.010, t2.length_mm, duty, 2, TYPE_0, sm, grating_sign=1)
    return [ShgProcess("type-II m=1", t2, 1.0),
            ShgProcess("type-I m=7", t1, 0.28),
            ShgProcess("type-0 m=2", t0, 0.34)]


def simulate_shg_scan(config, processes, detector, seed=None):
    """Single-laser sweep with w1 = w2; rate is the sum of per-process intensities."""
    if not config.diagonal:
        raise ValueError("SHG sweeps need a diagonal config (axis2_nm=None)")
    if not processes:
        raise ValueError("at least one SHG process is required")
    seed = config.seed if seed is None else seed
    if config.sample and seed is None:
        raise ValueError("a seed is required when sampling is requested")
    a1, _ = config.axes()
    w = nm_to_omega(a1)
    n1 = _rate(config.n1, a1)
    n2 = _rate(config.n2, a1)
    lo, hi = float(a1.min()), float(a1.max())
    components = {}
    for proc in processes:
        _check_process_in_range(proc, lo, hi)
        phi = phase_matching_on_grid(proc.crystal, None, w, w)
        components[proc.name] = (detector.efficiency * config.calibration * n1 * n2
                                 * proc.weight * np.abs(phi) ** 2)
    total = np.zeros_like(w)
    for comp in components.values():
        total = total + comp
    expected = total + detector.dark_rate
    counts = sample_counts(expected, detector.integration_time, seed) if config.sample else None
    cfg = config.as_dict()
    cfg["processes"] = [{"name": p.name, "amplitude": p.amplitude, "order": p.crystal.order,
                         "period_um": p.crystal.period_um, "duty": p.crystal.duty}
                        for p in processes]
    return ScanResult(a1, None, expected, counts, detector, seed, components, cfg)


def _check_process_in_range(proc, lo_nm, hi_nm, margin_nm=20.0):
    try:
        pt = find_degenerate_point(proc.crystal)
    except NoDegeneratePointError:
        warnings.warn(f"{proc.name}: no degenerate QPM point found", stacklevel=3)
        return
    if not lo_nm - margin_nm <= pt.wavelength_nm <= hi_nm + margin_nm:
        warnings.warn(f"{proc.name}: degenerate point {pt.wavelength_nm:.1f} nm lies outside "
                      f"the sweep {lo_nm:.1f}-{hi_nm:.1f} nm", stacklevel=3)


# ---------------------------------------------------------------------------
# SNR
# ---------------------------------------------------------------------------

def snr_db(peak_rate, dark_rate):
    if not dark_rate > 0:
        raise ValueError("SNR is undefined for a zero dark count rate")
    return 10.0 * np.log10(peak_rate / dark_rate)


def snr(result):
    """Peak expected count rate over the dark rate, in dB."""
    return snr_db(result.peak_rate, result.detector.dark_rate)
