"""
Joint spectral amplitude of the degenerate source and the pump bandwidth that
maximises the single-mode purity, for Gaussian and rectangular pump spectra.

Run: python3 demos/04_jsa_and_purity.py
"""
from qpmsource.dispersion import design_crystal
from qpmsource.joint_spectrum import FrequencyGrid, build_jsa, gaussian_pump_nm
from qpmsource.schmidt import optimize_pump_bandwidth, schmidt_decompose

crystal = design_crystal()
grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=10.0, n=256)

js = build_jsa(gaussian_pump_nm(790.0, 0.3), crystal, None, grid, normalize=True)
res = schmidt_decompose(js)
print(f"0.3 nm Gaussian pump: purity {res.purity:.4f}, Schmidt number {res.schmidt_number:.3f}")
print("leading Schmidt coefficients:", ", ".join(f"{v:.4f}" for v in res.coefficients[:5]))

for shape in ("gaussian", "rectangular"):
    scan = optimize_pump_bandwidth(crystal, None, shape, (0.02, 5.0), grid)
    print(f"{shape:<12} best bandwidth {scan.best_bandwidth_nm:.4f} nm -> I = "
          f"{scan.best_indistinguishability:.4f}")
