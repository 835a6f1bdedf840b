"""
Global error and step-size resonance at eps = 1/250
===================================================

Fixed-step Strang up to T = 0.5. For h of a few eps the error is O(1): the
split-step method is unstable when h/eps is comparable to the phase
rotation of the nonlinear flow. Below eps the usual second order returns.
"""

from semisplit import global_error_scan

eps = 1 / 250
hs = [2.0**-k for k in range(5, 14)]
for r in global_error_scan("strang", eps, hs):
    order = "" if r.observed_order is None else f"{r.observed_order:6.2f}"
    print(f"h/eps={r.t / eps:7.3f}  error {r.local_error:.3e}  {order}")
