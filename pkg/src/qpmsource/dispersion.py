"""
Refractive index, wavenumber, group delay and phase mismatch of a QPM crystal.

Frequencies are angular frequencies in rad/s throughout; vacuum wavelengths
(um or nm) only appear at the edges, in the Sellmeier evaluation and in the
convenience converters below.

The Sellmeier form supported here is

    n^2 = A + sum_j B_j / (1 - C_j / lambda^2) - D lambda^2      (lambda in um)

which covers the usual KTP fits. Coefficients are data, loaded from JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

AXES = ("Y", "Z")


class SellmeierRangeError(ValueError):
    """A wavelength fell outside the valid range of a Sellmeier set."""

    def __init__(self, axis, bound, wavelength_um):
        self.axis = axis
        self.bound = bound
        self.wavelength_um = wavelength_um
        side = "below" if wavelength_um < bound else "above"
        super().__init__(
            f"wavelength {wavelength_um:.6f} um is {side} the valid range "
            f"bound {bound} um of the {axis}-axis Sellmeier set"
        )


class NoDegeneratePointError(ValueError):
    """No degenerate phase-matching point could be located."""


# ---------------------------------------------------------------------------
# unit helpers
# ---------------------------------------------------------------------------

def wavelength_um_to_omega(wavelength_um):
    return 2 * np.pi * C_LIGHT / (np.asarray(wavelength_um, dtype=float) * 1e-6)


def omega_to_wavelength_um(omega):
    return 2 * np.pi * C_LIGHT / np.asarray(omega, dtype=float) * 1e6


def nm_to_omega(wavelength_nm):
    return 2 * np.pi * C_LIGHT / (np.asarray(wavelength_nm, dtype=float) * 1e-9)


def omega_to_nm(omega):
    return 2 * np.pi * C_LIGHT / np.asarray(omega, dtype=float) * 1e9


def bandwidth_nm_to_omega(bandwidth_nm, center_nm):
    """Convert a (small) wavelength width at ``center_nm`` to rad/s."""
    return 2 * np.pi * C_LIGHT * bandwidth_nm * 1e-9 / (center_nm * 1e-9) ** 2


def bandwidth_omega_to_nm(bandwidth, center_nm):
    return bandwidth * (center_nm * 1e-9) ** 2 / (2 * np.pi * C_LIGHT) * 1e9


# ---------------------------------------------------------------------------
# Sellmeier data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SellmeierSet:
    """One crystal axis worth of Sellmeier coefficients."""

    axis: str
    A: float
    poles: tuple = ()
    D: float = 0.0
    valid_range_um: tuple = (0.2, 5.0)
    provenance: str = ""

    def __post_init__(self):
        lo, hi = self.valid_range_um
        if not 0 < lo < hi:
            raise ValueError(f"bad valid range {self.valid_range_um} for axis {self.axis}")
        object.__setattr__(self, "poles", tuple((float(b), float(cc)) for b, cc in self.poles))

    def check_range(self, wavelength_um):
        lam = np.asarray(wavelength_um, dtype=float)
        lo, hi = self.valid_range_um
        if lam.size == 0:
            return lam
        lmin, lmax = float(np.min(lam)), float(np.max(lam))
        if not (np.isfinite(lmin) and np.isfinite(lmax)):
            raise SellmeierRangeError(self.axis, lo, float("nan"))
        if lmin < lo:
            raise SellmeierRangeError(self.axis, lo, lmin)
        if lmax > hi:
            raise SellmeierRangeError(self.axis, hi, lmax)
        return lam

    def index_squared(self, wavelength_um):
        lam = self.check_range(wavelength_um)
        l2 = lam * lam
        n2 = self.A - self.D * l2
        for b, cc in self.poles:
            n2 = n2 + b / (1.0 - cc / l2)
        return n2

    def d_index_squared(self, wavelength_um):
        """d(n^2)/d(lambda) in um^-1, differentiated by hand from the form above."""
        lam = self.check_range(wavelength_um)
        l2 = lam * lam
        d = -2.0 * self.D * lam
        for b, cc in self.poles:
            q = 1.0 - cc / l2
            d = d - 2.0 * b * cc / (lam * l2 * q * q)
        return d


def constant_index_set(n, axis="Y", valid_range_um=(0.2, 5.0)):
    """Dispersionless stub: n(lambda) == n everywhere in range."""
    return SellmeierSet(axis=axis, A=float(n) ** 2, poles=(), D=0.0,
                        valid_range_um=tuple(valid_range_um), provenance="constant-index stub")


DEFAULT_SELLMEIER_RESOURCE = "ktp_sellmeier.json"


def load_sellmeier(path=None):
    """Load a Sellmeier data file into ``{axis: SellmeierSet}``.

    With no path, the KTP set shipped with the package is used.
    """
    if path is None:
        text = resources.files("qpmsource.data").joinpath(DEFAULT_SELLMEIER_RESOURCE).read_text()
        source = DEFAULT_SELLMEIER_RESOURCE
    else:
        path = Path(path)
        if path.suffix.lower() == ".toml":
            doc = _load_toml(path)
            text = None
        else:
            text = path.read_text()
        source = str(path)
    if text is not None:
        doc = json.loads(text)
    axes = doc.get("axes")
    if not isinstance(axes, dict) or not axes:
        raise ValueError(f"{source}: Sellmeier file has no 'axes' table")
    provenance = doc.get("provenance", "")
    sets = {}
    for axis, rec in axes.items():
        try:
            sets[axis] = SellmeierSet(
                axis=axis,
                A=float(rec["A"]),
                poles=tuple(tuple(p) for p in rec.get("poles", [])),
                D=float(rec.get("D", 0.0)),
                valid_range_um=tuple(float(v) for v in rec["valid_range_um"]),
                provenance=rec.get("provenance", provenance),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{source}: malformed record for axis {axis}: {exc}") from exc
    return sets


def _load_toml(path):
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _select(axis, sellmeier):
    if isinstance(sellmeier, SellmeierSet):
        return sellmeier
    try:
        return sellmeier[axis]
    except KeyError:
        raise KeyError(f"no Sellmeier set for axis {axis!r}") from None


# ---------------------------------------------------------------------------
# crystal description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarizationConfig:
    pump: str
    signal: str
    idler: str

    def __post_init__(self):
        for name in ("pump", "signal", "idler"):
            if getattr(self, name) not in AXES:
                raise ValueError(f"{name} axis must be one of {AXES}, got {getattr(self, name)!r}")

    @classmethod
    def named(cls, name):
        key = name.lower().replace("_", "-").replace("type", "type-").replace("--", "-")
        try:
            return NAMED_POLARIZATIONS[key]
        except KeyError:
            raise ValueError(f"unknown polarization configuration {name!r}; "
                             f"expected one of {sorted(NAMED_POLARIZATIONS)}") from None

    def swapped(self):
        return PolarizationConfig(self.pump, self.idler, self.signal)


TYPE_II = PolarizationConfig(pump="Y", signal="Z", idler="Y")
TYPE_I = PolarizationConfig(pump="Z", signal="Y", idler="Y")
TYPE_0 = PolarizationConfig(pump="Z", signal="Z", idler="Z")
NAMED_POLARIZATIONS = {"type-ii": TYPE_II, "type-i": TYPE_I, "type-0": TYPE_0}


@dataclass(frozen=True, eq=False)
class CrystalSpec:
    """A periodically poled crystal.

    ``grating_sign`` picks which of the two Fourier components (+/- 2 pi m / Lambda)
    of the poling pattern compensates the material mismatch. The KTP Type-II
    interaction has k_p < k_s + k_i and needs ``grating_sign=-1``; Type-I and
    Type-0 use +1.
    """

    period_um: float
    length_mm: float
    duty: float = 0.5
    order: int = 1
    polarization: PolarizationConfig = TYPE_II
    sellmeier: Mapping = field(default_factory=load_sellmeier)
    grating_sign: int = 1

    def __post_init__(self):
        if not self.period_um > 0:
            raise ValueError("poling period must be positive")
        if not self.length_mm > 0:
            raise ValueError("crystal length must be positive")
        if not 0 < self.duty < 1:
            raise ValueError("duty cycle must lie strictly between 0 and 1")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("QPM order must be a positive integer")
        if self.grating_sign not in (1, -1):
            raise ValueError("grating_sign must be +1 or -1")
        if isinstance(self.sellmeier, SellmeierSet):
            object.__setattr__(self, "sellmeier", {self.sellmeier.axis: self.sellmeier})
        for axis in (self.polarization.pump, self.polarization.signal, self.polarization.idler):
            _select(axis, self.sellmeier)

    @property
    def period_m(self):
        return self.period_um * 1e-6

    @property
    def length_m(self):
        return self.length_mm * 1e-3

    def grating_wavevector(self, order=None):
        m = self.order if order is None else order
        return self.grating_sign * 2 * np.pi * m / self.period_m

    def with_params(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)

    def swapped(self):
        """Same crystal with signal and idler roles exchanged."""
        return self.with_params(polarization=self.polarization.swapped())

    def __repr__(self):
        p = self.polarization
        return (f"CrystalSpec(period_um={self.period_um!r}, length_mm={self.length_mm!r}, "
                f"duty={self.duty!r}, order={self.order!r}, "
                f"polarization={p.pump}{p.signal}{p.idler}, grating_sign={self.grating_sign})")


def design_crystal(sellmeier=None):
    """The as-designed Type-II PPKTP: 46.1 um period, 30 mm, 50 % duty, first order."""
    return CrystalSpec(46.1, 30.0, 0.5, 1, TYPE_II, sellmeier or load_sellmeier(), grating_sign=-1)


def fitted_crystal(sellmeier=None):
    """Type-II PPKTP with the period and length recovered from the SFG cross-section."""
    return CrystalSpec(46.125, 29.0, 0.5, 1, TYPE_II, sellmeier or load_sellmeier(), grating_sign=-1)


# ---------------------------------------------------------------------------
# dispersion
# ---------------------------------------------------------------------------

def refractive_index(wavelength_um, axis, sellmeier):
    s = _select(axis, sellmeier)
    return np.sqrt(s.index_squared(wavelength_um))


def wavenumber(omega, axis, sellmeier):
    """k = n(omega) omega / c in rad/m."""
    omega = np.asarray(omega, dtype=float)
    return refractive_index(omega_to_wavelength_um(omega), axis, sellmeier) * omega / C_LIGHT


def inverse_group_velocity(omega, axis, sellmeier):
    """dk/domega in s/m, from the analytic Sellmeier derivative."""
    s = _select(axis, sellmeier)
    lam = omega_to_wavelength_um(omega)
    n = np.sqrt(s.index_squared(lam))
    dn_dlam = s.d_index_squared(lam) / (2 * n)
    return (n - lam * dn_dlam) / C_LIGHT


def group_mismatch(crystal, signal_center, idler_center):
    """(D_s, D_i) = (k'_p - k'_s, k'_p - k'_i) at the given centre frequencies."""
    pol, sm = crystal.polarization, crystal.sellmeier
    kp1 = inverse_group_velocity(signal_center + idler_center, pol.pump, sm)
    ks1 = inverse_group_velocity(signal_center, pol.signal, sm)
    ki1 = inverse_group_velocity(idler_center, pol.idler, sm)
    return kp1 - ks1, kp1 - ki1


def material_mismatch(omega_1, omega_2, crystal):
    """k_p(w1 + w2) - k_s(w1) - k_i(w2), no grating term."""
    pol, sm = crystal.polarization, crystal.sellmeier
    omega_1 = np.asarray(omega_1, dtype=float)
    omega_2 = np.asarray(omega_2, dtype=float)
    return (wavenumber(omega_1 + omega_2, pol.pump, sm)
            - wavenumber(omega_1, pol.signal, sm)
            - wavenumber(omega_2, pol.idler, sm))


def phase_mismatch(omega_1, omega_2, crystal, order=None):
    """QPM phase mismatch in rad/m.

    ``order`` overrides ``crystal.order`` and may be negative (the opposite
    Fourier component of the grating).
    """
    return material_mismatch(omega_1, omega_2, crystal) - crystal.grating_wavevector(order)


# ---------------------------------------------------------------------------
# degenerate point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegeneratePoint:
    wavelength_um: float
    kind: str          # "root": exact zero of the diagonal mismatch; "stationary": GVM extremum
    delta_k: float     # rad/m at the returned point

    @property
    def wavelength_nm(self):
        return self.wavelength_um * 1e3


def degenerate_window_um(crystal):
    """Signal/idler wavelengths for which all three fields stay in range."""
    pol, sm = crystal.polarization, crystal.sellmeier
    lo = max(_select(pol.signal, sm).valid_range_um[0], _select(pol.idler, sm).valid_range_um[0],
             2 * _select(pol.pump, sm).valid_range_um[0])
    hi = min(_select(pol.signal, sm).valid_range_um[1], _select(pol.idler, sm).valid_range_um[1],
             2 * _select(pol.pump, sm).valid_range_um[1])
    if not lo < hi:
        raise NoDegeneratePointError("Sellmeier ranges leave no common degenerate window")
    return lo, hi


def _diag_mismatch(lam_um, crystal):
    w = wavelength_um_to_omega(lam_um)
    return phase_mismatch(w, w, crystal)


def _diag_slope(lam_um, crystal):
    # d/domega of dk(omega, omega) = 2 k'_p(2w) - k'_s(w) - k'_i(w) = D_s + D_i
    w = wavelength_um_to_omega(lam_um)
    ds, di = group_mismatch(crystal, w, w)
    return ds + di


def _sign_change_roots(fn, grid, xtol):
    vals = fn(grid)
    roots = []
    for j in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        a, b = grid[j], grid[j + 1]
        if vals[j] == 0:
            roots.append(float(a))
            continue
        if vals[j + 1] == 0:
            continue  # picked up as the left end of the next interval
        roots.append(brentq(lambda x: float(fn(x)), a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))
    return roots


def find_degenerate_point(crystal, window_um=None, n_scan=2001, xtol_um=1e-13):
    """Locate the degenerate (w_s = w_i) phase-matching wavelength.

    Strict zeros of the diagonal mismatch are searched first. A
    group-velocity-matched crystal has a stationary diagonal mismatch, so a
    period slightly off the turning value gives no zero at all even though the
    crystal still phase-matches within its sinc bandwidth. In that case the
    stationary point is returned when |dk| L / 2 < pi (inside the main lobe).
    """
    lo, hi = window_um if window_um is not None else degenerate_window_um(crystal)
    # keep the derivative evaluation off the range edges
    pad = 1e-9 * (hi - lo)
    grid = np.linspace(lo + pad, hi - pad, n_scan)

    roots = _sign_change_roots(lambda x: _diag_mismatch(x, crystal), grid, xtol_um)
    stationary = _sign_change_roots(lambda x: _diag_slope(x, crystal), grid, xtol_um)
    best_stat = None
    if stationary:
        dks = [abs(float(_diag_mismatch(x, crystal))) for x in stationary]
        best_stat = stationary[int(np.argmin(dks))]

    if roots:
        if len(roots) > 1 and best_stat is not None:
            lam = min(roots, key=lambda r: (abs(r - best_stat), r))
        else:
            lam = roots[0]
        return DegeneratePoint(float(lam), "root", float(_diag_mismatch(lam, crystal)))

    if best_stat is not None:
        dk = float(_diag_mismatch(best_stat, crystal))
        if abs(dk) * crystal.length_m / 2 < np.pi:
            return DegeneratePoint(float(best_stat), "stationary", dk)
    raise NoDegeneratePointError(
        f"no degenerate QPM point in range {lo:.4f}-{hi:.4f} um for {crystal!r}")


def degenerate_qpm_wavelength(crystal, window_um=None):
    """Degenerate signal/idler wavelength in um (see :func:`find_degenerate_point`)."""
    return find_degenerate_point(crystal, window_um).wavelength_um


def auto_grating_sign(crystal):
    """Grating component that can compensate the material mismatch (its sign at mid-window)."""
    lo, hi = degenerate_window_um(crystal)
    w = wavelength_um_to_omega(0.5 * (lo + hi))
    return 1 if material_mismatch(w, w, crystal) >= 0 else -1
