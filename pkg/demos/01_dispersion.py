"""
Dispersion of the Type-II PPKTP crystal and its degenerate phase-matching point.

Run: python3 demos/01_dispersion.py
"""
import numpy as np

from qpmsource.dispersion import (
    TYPE_II,
    CrystalSpec,
    design_crystal,
    find_degenerate_point,
    group_mismatch,
    load_sellmeier,
    nm_to_omega,
    phase_mismatch,
    refractive_index,
    wavelength_um_to_omega,
)

sm = load_sellmeier()
for lam in (0.79, 1.58):
    print(f"n_Y({lam} um) = {refractive_index(lam, 'Y', sm):.6f}   n_Z = {refractive_index(lam, 'Z', sm):.6f}")

crystal = design_crystal(sm)
pt = find_degenerate_point(crystal)
print(f"\ndesign crystal {crystal}")
print(f"degenerate point {pt.wavelength_nm:.2f} nm ({pt.kind}), residual dk = {pt.delta_k:.1f} rad/m")

w = wavelength_um_to_omega(pt.wavelength_um)
ds, di = group_mismatch(crystal, w, w)
print(f"D_s = {ds:.4e} s/m, D_i = {di:.4e} s/m, D_s + D_i = {ds + di:.1e}")

# The diagonal mismatch is stationary here: a slightly longer period gives two exact zeros.
print("\nperiod (um)   kind         wavelength (nm)")
for period in (46.1, 46.15, 46.2, 46.3):
    c = CrystalSpec(period, 30.0, polarization=TYPE_II, sellmeier=sm, grating_sign=-1)
    p = find_degenerate_point(c)
    print(f"{period:10.3f}   {p.kind:<11}  {p.wavelength_nm:.2f}")

lam = np.linspace(1570, 1590, 5)
dk = phase_mismatch(nm_to_omega(lam), nm_to_omega(lam), crystal)
print("\ndiagonal dk (rad/m):", np.array2string(dk, precision=1))
