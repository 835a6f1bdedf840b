"""
WKB initial data
================

u0 = exp(-x^2) exp(-(i/eps) log(2 cosh x)) oscillates on the scale eps. The
local error keeps the classical order in t, but its size grows like 1/eps.
The grid needs at least 8 points per wavelength 2 pi eps; n=4096 on [-10, 10]
is enough for eps = 1e-2.
"""

from semisplit import dyadic_times, default_grid, noise_floor, record_rows, scan_slope, wkb, wkb_scan

grid = default_grid(n=4096)
ts = dyadic_times(2.0**-4, 2.0**-10)
scans = {eps: wkb_scan(["strang", "yoshida4"], eps, ts, grid=grid) for eps in (2e-2, 1e-2)}
floor = noise_floor(grid, wkb(grid, 1e-2))

for name in ["strang", "yoshida4"]:
    fine, coarse = record_rows(scans[1e-2], name), record_rows(scans[2e-2], name)
    print(f"{name}: slope {scan_slope(fine, floor=floor):.2f}")
    for a, b in zip(fine, coarse):
        if a.local_error > 10 * floor:
            print(f"   t={a.t:.2e}  err(eps=1e-2)/err(eps=2e-2) = {a.local_error / b.local_error:.2f}")
