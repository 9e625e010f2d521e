"""
Wideband SHG sweep with three processes sharing one poling pattern: the first-order
Type-II peak near 1582 nm and the weak 7th-order Type-I and 2nd-order Type-0
peaks near 1500 nm.

Run: python3 demos/03_shg_sweep.py
"""
import numpy as np

from qpmsource.scan import DetectorModel, ScanConfig, default_shg_processes, simulate_shg_scan

cfg = ScanConfig((1480.0, 1590.0), 0.04, None, seed=3)
res = simulate_shg_scan(cfg, default_shg_processes(duty=0.47), DetectorModel())
main = res.components["type-II m=1"].max()
for name, comp in res.components.items():
    j = int(np.argmax(comp))
    print(f"{name:<12} peak at {res.axis1_nm[j]:.2f} nm, relative height {comp[j] / main:.2e}")

comp = res.components["type-II m=1"]
is_max = (comp[1:-1] > comp[:-2]) & (comp[1:-1] >= comp[2:])
lobes = res.axis1_nm[1:-1][is_max & (comp[1:-1] > 1e-4 * main)]
print(f"type-II maxima above 1e-4: {lobes.size} (main peak plus {lobes.size - 1} side lobes)")
