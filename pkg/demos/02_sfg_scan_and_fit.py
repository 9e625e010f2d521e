"""
Simulated two-laser SFG scan of the fitted crystal, then recovery of the poling
period and length from the fixed-pump cross-section of the noisy counts.

Run: python3 demos/02_sfg_scan_and_fit.py
"""
from qpmsource.dispersion import design_crystal, fitted_crystal
from qpmsource.fitting import FitProblem, anticorrelated_cross_section, fit_crystal, fit_report
from qpmsource.scan import DetectorModel, ScanConfig, simulate_sfg_scan, snr

truth = fitted_crystal()
cfg = ScanConfig((1575.0, 1585.0), 0.04, (1575.0, 1585.0), calibration=1e6, seed=1)
res = simulate_sfg_scan(cfg, truth, DetectorModel(dark_rate=100.0))
print(f"scan {res.counts.shape}, peak {res.peak_rate:.0f} counts/s, SNR {snr(res):.2f} dB")

x, y = anticorrelated_cross_section(res, pump_nm=790.0, values="counts")
print(f"cross-section along the 790 nm line: {x.size} points")

problem = FitProblem(x, y, design_crystal(), {"period_um": (45.9, 46.3), "length_mm": (28.0, 31.0)})
fit = fit_crystal(problem)
print()
print(fit_report(fit))
