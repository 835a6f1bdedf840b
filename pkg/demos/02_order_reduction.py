"""
Order reduction for small eps
=============================

With eps = 1e-2 the Lie local error is t^3-like for t well above eps and
drops to t^2 below it. Strang keeps t^3 on both sides.

Along the diagonal t = eps both methods lose one more order.
"""

from semisplit import default_grid, DEFAULT_STATE, eps_scan, noise_floor, order_scan, record_rows, scan_slope

grid = default_grid()
floor = noise_floor(grid, DEFAULT_STATE.evaluate(grid))
eps = 1e-2

above = [eps * 2.0**k for k in range(6, 1, -1)]
below = [eps * 2.0**-k for k in range(2, 7)]
for name in ["lie", "strang"]:
    hi = scan_slope(order_scan([name], eps, above), floor=floor)
    lo = scan_slope(order_scan([name], eps, below), floor=floor)
    print(f"{name:>7s}  slope {hi:.2f} for t > eps, {lo:.2f} for t < eps")

# now couple the step to eps
diag = eps_scan(["lie", "strang"], [2.0**-k for k in range(4, 11)])
for name in ["lie", "strang"]:
    rows = record_rows(diag, name)
    print(f"{name:>7s}  t = eps: local error slope {scan_slope(rows, floor=floor):.2f}, "
          f"estimator deviation slope {scan_slope(rows, 'est_deviation', floor):.2f}")
