"""
Explicit domain walls: an ideal grating against one with random wall positions.
The jittered map is then imported the same way measured data would be.

Run: python3 demos/05_domain_jitter.py
"""
import numpy as np

from qpmsource.dispersion import fitted_crystal, omega_to_nm
from qpmsource.joint_spectrum import (
    DomainPoling,
    FrequencyGrid,
    TabulatedPhaseMatching,
    build_jsa,
    gaussian_pump_nm,
    phase_matching_on_grid,
)
from qpmsource.schmidt import schmidt_decompose

crystal = fitted_crystal()
grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=8.0, n=200)
ws, wi = grid.mesh()
pump = gaussian_pump_nm(790.0, 0.3)

for jitter in (0.0, 0.1, 0.3):
    dom = DomainPoling.from_crystal(crystal, jitter, np.random.default_rng(0))
    inten = np.abs(phase_matching_on_grid(crystal, dom, ws, wi)) ** 2
    tab = TabulatedPhaseMatching.from_intensity(omega_to_nm(grid.signal_omega),
                                                omega_to_nm(grid.idler_omega), inten,
                                                f"jitter {jitter}")
    js = build_jsa(pump, crystal, tab, grid)
    anti = np.fliplr(inten).diagonal() / inten.max()
    floor = anti[anti < 0.05].min()
    print(f"wall jitter {jitter:.1f} x domain width: peak |phi|^2 {inten.max():.4f}, "
          f"deepest antidiagonal minimum {floor:.1e}, purity {schmidt_decompose(js).purity:.4f}")
