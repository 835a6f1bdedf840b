"""
Defect-based error estimate
===========================

estimate() returns the step together with P = t/(p+1) * defect. For small t,
P should match the true local error L to leading order, so the ratio
||P|| / ||L|| tends to one and ||P - L|| is one order smaller than ||L||.
"""

from semisplit import DEFAULT_STATE, Problem, ProblemParams, builtin_scheme, default_grid, estimate, reference_flow

grid = default_grid()
u = DEFAULT_STATE.evaluate(grid)
P = Problem(grid, ProblemParams(eps=1.0))

for name in ["lie", "strang", "yoshida4"]:
    scheme = builtin_scheme(name)
    print(name)
    for t in [0.1, 0.05, 0.025, 0.0125]:
        rec = estimate(P, scheme, t, u)
        L = rec.u_out - reference_flow(P, t, u)
        print(f"   t={t:<7}  |L|={grid.l2_norm(L):.3e}  |P|/|L|={rec.est_norm / grid.l2_norm(L):.4f}"
              f"  |P-L|={grid.l2_norm(rec.estimator - L):.2e}")
