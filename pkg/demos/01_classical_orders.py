"""
Local error of the built-in splittings at eps = 1
=================================================

Each scheme is stepped once from a wide Gaussian and compared with a
sixth-order reference. On a log-log scale the error falls like t^(p+1).
"""

import numpy as np

from semisplit import default_grid, DEFAULT_STATE, dyadic_times, noise_floor, order_scan, record_rows, scan_slope

grid = default_grid()
u0 = DEFAULT_STATE.evaluate(grid)
floor = noise_floor(grid, u0)
print("noise floor", floor)

ts = dyadic_times(2.0**-4, 2.0**-12)
recs = order_scan(["lie", "strang", "ruth3", "yoshida4", "auz5"], 1.0, ts)

for name in ["lie", "strang", "ruth3", "yoshida4", "auz5"]:
    rows = record_rows(recs, name)
    errs = np.array([r.local_error for r in rows])
    print(f"{name:>9s}  slope {scan_slope(rows, floor=floor):.3f}  errors", np.array2string(errs, precision=1))

# points near 1e-13 are rounding, not truncation; the slope fit drops them
