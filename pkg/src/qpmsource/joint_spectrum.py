"""
Pump envelopes, phase-matching functions and joint spectral amplitudes.

The JSA is the product f(w_s, w_i) = alpha(w_s + w_i) * phi(dk(w_s, w_i)) on a
grid that is uniform in angular frequency, so plain matrix operations (sums,
SVD) are correct quadratures up to a constant cell area.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import (
    CrystalSpec,
    bandwidth_nm_to_omega,
    material_mismatch,
    nm_to_omega,
    omega_to_nm,
    phase_mismatch,
)


# ---------------------------------------------------------------------------
# pump envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianPump:
    center: float      # rad/s
    sigma: float       # rad/s, 1/e half-width of the amplitude

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("Gaussian pump bandwidth must be positive")


@dataclass(frozen=True)
class RectangularPump:
    center: float      # rad/s
    width: float       # rad/s, full width

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("rectangular pump width must be positive")


@dataclass(frozen=True, eq=False)
class TabulatedPump:
    frequencies: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        a = np.asarray(self.amplitudes, dtype=float)
        if w.ndim != 1 or w.shape != a.shape or w.size < 2:
            raise ValueError("tabulated pump needs matching 1-D frequency and amplitude arrays")
        if np.any(np.diff(w) <= 0):
            raise ValueError("tabulated pump frequencies must be strictly increasing")
        if np.any(a < 0):
            raise ValueError("tabulated pump amplitudes must be non-negative")
        peak = a.max()
        if peak <= 0:
            raise ValueError("tabulated pump is identically zero")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "amplitudes", a / peak)

    @property
    def center(self):
        return float(self.frequencies[np.argmax(self.amplitudes)])


def gaussian_pump_nm(center_nm, sigma_nm):
    return GaussianPump(float(nm_to_omega(center_nm)), bandwidth_nm_to_omega(sigma_nm, center_nm))


def rectangular_pump_nm(center_nm, width_nm):
    return RectangularPump(float(nm_to_omega(center_nm)), bandwidth_nm_to_omega(width_nm, center_nm))


def pump_amplitude(envelope, omega_sum):
    """Pump spectral amplitude alpha(w_s + w_i), peak-normalised to 1."""
    w = np.asarray(omega_sum, dtype=float)
    if isinstance(envelope, GaussianPump):
        x = (w - envelope.center) / envelope.sigma
        return np.exp(-x * x)
    if isinstance(envelope, RectangularPump):
        # closed interval
        return (np.abs(w - envelope.center) <= envelope.width / 2).astype(float)
    if isinstance(envelope, TabulatedPump):
        return np.interp(w, envelope.frequencies, envelope.amplitudes, left=0.0, right=0.0)
    raise TypeError(f"unsupported pump envelope {type(envelope).__name__}")


# ---------------------------------------------------------------------------
# phase matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformPoling:
    """Ideal grating of length ``length_m``: phi = sinc(dk L / 2)."""

    length_m: float

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError("length must be positive")

    @classmethod
    def from_crystal(cls, crystal):
        return cls(crystal.length_m)


@dataclass(frozen=True, eq=False)
class DomainPoling:
    """Explicit domain walls z_0 = 0 < z_1 < ... < z_N (metres).

    Domain j spans [z_j, z_{j+1}] and has sign ``start_sign * (-1)**j``.
    Evaluated at the *un-poled* material mismatch, since the domains are the grating.
    """

    boundaries: np.ndarray
    start_sign: int = 1

    def __post_init__(self):
        z = np.asarray(self.boundaries, dtype=float)
        if z.ndim != 1 or z.size < 2:
            raise ValueError("need at least two domain boundaries")
        if z[0] != 0.0:
            raise ValueError("first domain boundary must be at z = 0")
        if np.any(np.diff(z) <= 0):
            raise ValueError("domain boundaries must be strictly increasing")
        if self.start_sign not in (1, -1):
            raise ValueError("start_sign must be +1 or -1")
        object.__setattr__(self, "boundaries", z)

    @property
    def length_m(self):
        return float(self.boundaries[-1])

    @property
    def signs(self):
        n = self.boundaries.size - 1
        return self.start_sign * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)

    @classmethod
    def periodic(cls, period_m, length_m, duty=0.5, start_sign=1):
        """Regular grating, truncated at ``length_m``; duty = fraction of each period with start_sign."""
        n_periods = int(np.floor(length_m / period_m + 1e-9))
        walls = [0.0]
        for j in range(n_periods):
            walls.append((j + duty) * period_m)
            walls.append((j + 1) * period_m)
        if length_m - walls[-1] > 1e-12 * length_m:
            start = walls[-1]
            if start + duty * period_m < length_m:
                walls.append(start + duty * period_m)
            walls.append(length_m)
        return cls(np.array(walls), start_sign)

    @classmethod
    def from_crystal(cls, crystal, jitter=0.0, rng=None):
        """Domains for ``crystal`` with optional Gaussian wall jitter.

        ``jitter`` is the wall-position standard deviation as a fraction of the
        nominal domain width (period / 2).
        """
        dom = cls.periodic(crystal.period_m, crystal.length_m, crystal.duty)
        if jitter <= 0:
            return dom
        return dom.jittered(jitter * crystal.period_m / 2, rng)

    def jittered(self, sigma_m, rng=None):
        rng = np.random.default_rng(rng)
        z = self.boundaries.copy()
        inner = z[1:-1] + rng.normal(0.0, sigma_m, z.size - 2)
        inner.sort()
        z[1:-1] = np.clip(inner, 0.0, z[-1])
        # re-impose strict monotonicity after clipping/sorting
        z = np.maximum.accumulate(z)
        keep = np.concatenate([[True], np.diff(z) > 0])
        z = z[keep]
        if z[-1] != self.boundaries[-1]:
            z[-1] = self.boundaries[-1]
        return DomainPoling(z, self.start_sign)


@dataclass(frozen=True, eq=False)
class TabulatedPhaseMatching:
    """Measured |phi| on a (signal, idler) angular-frequency grid, zero phase.

    Built from intensity data through :meth:`from_intensity`, which takes the
    square root and peak-normalises.
    """

    signal_omega: np.ndarray
    idler_omega: np.ndarray
    magnitude: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ws = np.asarray(self.signal_omega, dtype=float)
        wi = np.asarray(self.idler_omega, dtype=float)
        mag = np.asarray(self.magnitude, dtype=float)
        if mag.shape != (ws.size, wi.size):
            raise ValueError("magnitude shape does not match the frequency axes")
        if np.any(np.diff(ws) <= 0) or np.any(np.diff(wi) <= 0):
            raise ValueError("tabulated axes must be strictly increasing in frequency")
        object.__setattr__(self, "signal_omega", ws)
        object.__setattr__(self, "idler_omega", wi)
        object.__setattr__(self, "magnitude", mag)

    @classmethod
    def from_intensity(cls, signal_nm, idler_nm, intensity, source=""):
        """Import |phi|^2 data on wavelength axes (nm); amplitude = sqrt(intensity)."""
        inten = np.clip(np.asarray(intensity, dtype=float), 0.0, None)
        ws = nm_to_omega(signal_nm)
        wi = nm_to_omega(idler_nm)
        si = np.argsort(ws)
        ii = np.argsort(wi)
        mag = np.sqrt(inten[np.ix_(si, ii)])
        peak = mag.max()
        if peak > 0:
            mag = mag / peak
        meta = {"amplitude": "sqrt(intensity)", "phase": "zero", "normalization": "unit peak"}
        if source:
            meta["source"] = source
        return cls(ws[si], wi[ii], mag, meta)

    def evaluate(self, omega_s, omega_i):
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator((self.signal_omega, self.idler_omega), self.magnitude,
                                         method="linear", bounds_error=False, fill_value=0.0)
        ws, wi = np.broadcast_arrays(np.asarray(omega_s, float), np.asarray(omega_i, float))
        pts = np.stack([ws.ravel(), wi.ravel()], axis=-1)
        return interp(pts).reshape(ws.shape)


def pm_amplitude_uniform(delta_k, length_m, include_phase=False):
    """sinc(dk L / 2), optionally times exp(i dk L / 2)."""
    if not length_m > 0:
        raise ValueError("length must be positive")
    x = np.asarray(delta_k, dtype=float) * length_m / 2
    phi = np.sinc(x / np.pi)
    if include_phase:
        return phi * np.exp(1j * x)
    return phi


def pm_amplitude_domains(delta_k, spec, chunk=4096):
    """(1/L) sum_j s_j int_{z_j}^{z_{j+1}} exp(i dk z) dz for explicit domains."""
    dk = np.asarray(delta_k, dtype=float)
    z = spec.boundaries
    s = spec.signs
    total = z[-1]
    # wall weights: each wall contributes (s_{j-1} - s_j) exp(i dk z_j)
    w = np.zeros(z.size)
    w[:-1] -= s
    w[1:] += s
    flat = dk.ravel()
    out = np.empty(flat.size, dtype=complex)
    small = np.abs(flat) * total < 1e-6
    for start in range(0, flat.size, chunk):
        sl = slice(start, min(start + chunk, flat.size))
        k = flat[sl]
        phase = np.exp(1j * np.outer(k, z))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[sl] = (phase @ w) / (1j * k * total)
    if np.any(small):
        # second-order series: int exp(i k z) ~ dz + i k (z1^2 - z0^2)/2 - k^2 (z1^3 - z0^3)/6
        k = flat[small]
        dz = np.diff(z)
        m1 = np.sum(s * dz)
        m2 = np.sum(s * np.diff(z ** 2)) / 2
        m3 = np.sum(s * np.diff(z ** 3)) / 6
        out[small] = (m1 + 1j * k * m2 - k * k * m3) / total
    return out.reshape(dk.shape)


# ---------------------------------------------------------------------------
# joint spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform signal and idler angular-frequency axes."""

    signal_center: float
    idler_center: float
    signal_omega: np.ndarray
    idler_omega: np.ndarray

    @classmethod
    def from_wavelengths(cls, signal_nm, idler_nm=None, span_nm=10.0, n=251):
        """Grid spanning ``span_nm`` of wavelength around each centre, uniform in omega."""
        if idler_nm is None:
            idler_nm = signal_nm
        if n > 1024:
            raise ValueError("grids are limited to 1024 points per axis")

        def axis(center):
            lo = float(nm_to_omega(center + span_nm / 2))
            hi = float(nm_to_omega(center - span_nm / 2))
            return np.linspace(lo, hi, n)

        return cls(float(nm_to_omega(signal_nm)), float(nm_to_omega(idler_nm)),
                   axis(signal_nm), axis(idler_nm))

    @classmethod
    def symmetric(cls, signal_center, idler_center, half_width, n, idler_half_width=None):
        hw_i = half_width if idler_half_width is None else idler_half_width
        return cls(signal_center, idler_center,
                   signal_center + np.linspace(-half_width, half_width, n),
                   idler_center + np.linspace(-hw_i, hw_i, n))

    @property
    def pump_center(self):
        return self.signal_center + self.idler_center

    def mesh(self):
        return np.meshgrid(self.signal_omega, self.idler_omega, indexing="ij")


@dataclass(frozen=True, eq=False)
class JointSpectrum:
    signal_detuning: np.ndarray     # rad/s, Omega_s = w_s - w_s0
    idler_detuning: np.ndarray
    signal_center: float
    idler_center: float
    amplitude: np.ndarray           # complex, [signal, idler]
    normalized: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.amplitude)
        if a.shape != (np.size(self.signal_detuning), np.size(self.idler_detuning)):
            raise ValueError("amplitude matrix shape does not match the axes")
        for ax in (self.signal_detuning, self.idler_detuning):
            ax = np.asarray(ax, dtype=float)
            if ax.size > 1:
                d = np.diff(ax)
                if np.any(d <= 0):
                    raise ValueError("detuning axes must be strictly increasing")
                if np.max(np.abs(d - d.mean())) > 1e-9 * abs(d.mean()):
                    raise ValueError("detuning axes must be uniformly spaced")

    @property
    def signal_omega(self):
        return self.signal_center + self.signal_detuning

    @property
    def idler_omega(self):
        return self.idler_center + self.idler_detuning

    @property
    def signal_nm(self):
        return omega_to_nm(self.signal_omega)

    @property
    def idler_nm(self):
        return omega_to_nm(self.idler_omega)

    @property
    def cell_area(self):
        return _step(self.signal_detuning) * _step(self.idler_detuning)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitude) ** 2) * self.cell_area))

    def normalize(self):
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalise an all-zero JSA")
        return JointSpectrum(self.signal_detuning, self.idler_detuning, self.signal_center,
                             self.idler_center, self.amplitude / nrm, True, dict(self.metadata))

    def transpose(self):
        return JointSpectrum(self.idler_detuning, self.signal_detuning, self.idler_center,
                             self.signal_center, self.amplitude.T, self.normalized, dict(self.metadata))


def _step(axis):
    axis = np.asarray(axis, dtype=float)
    return float((axis[-1] - axis[0]) / (axis.size - 1)) if axis.size > 1 else 1.0


def phase_matching_on_grid(crystal, pm, omega_s, omega_i, include_phase=False):
    """phi(dk(w_s, w_i)) for any of the phase-matching variants."""
    if pm is None:
        pm = UniformPoling.from_crystal(crystal)
    if isinstance(pm, UniformPoling):
        return pm_amplitude_uniform(phase_mismatch(omega_s, omega_i, crystal), pm.length_m, include_phase)
    if isinstance(pm, DomainPoling):
        return pm_amplitude_domains(material_mismatch(omega_s, omega_i, crystal), pm)
    if isinstance(pm, TabulatedPhaseMatching):
        return pm.evaluate(omega_s, omega_i)
    raise TypeError(f"unsupported phase-matching spec {type(pm).__name__}")


def build_jsa(pump, crystal, pm, grid, normalize=False, include_phase=False):
    """f[i, j] = alpha(w_s,i + w_i,j) * phi(dk(w_s,i, w_i,j))."""
    ws, wi = grid.mesh()
    alpha = pump_amplitude(pump, ws + wi)
    phi = phase_matching_on_grid(crystal, pm, ws, wi, include_phase)
    amp = alpha * phi
    if not np.iscomplexobj(amp):
        amp = amp.astype(complex)
    meta = {"include_phase": bool(include_phase),
            "phase_matching": type(pm).__name__ if pm is not None else "UniformPoling",
            "pump": type(pump).__name__}
    if isinstance(pm, TabulatedPhaseMatching):
        meta.update(pm.metadata)
    js = JointSpectrum(grid.signal_omega - grid.signal_center, grid.idler_omega - grid.idler_center,
                       grid.signal_center, grid.idler_center, amp, False, meta)
    return js.normalize() if normalize else js


def jsi(js):
    return np.abs(js.amplitude) ** 2


def spdc_rate(js, pump_photon_rate):
    """Relative pair rate N_p(w_s + w_i) |f|^2. ``pump_photon_rate`` is a callable of omega or a constant."""
    ws, wi = np.meshgrid(js.signal_omega, js.idler_omega, indexing="ij")
    if callable(pump_photon_rate):
        n_p = np.asarray(pump_photon_rate(ws + wi), dtype=float)
    else:
        n_p = float(pump_photon_rate)
    return n_p * jsi(js)
