"""How the three spectral filters tame 1/t, and what their constants are.

Run: python3 demos/01_filters.py
"""
import numpy as np

from specweak import FilterFunction, analytic_constants, certify_constants

lam = 1e-2
t = np.array([0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0])
print(f"s_lam(t) at lam={lam}; the unregularized 1/t would blow up at t -> 0")
print("t        " + "  ".join(f"{v:9.1e}" for v in t))
for f in (FilterFunction.tikhonov(), FilterFunction.tsvd(), FilterFunction.landweber(1.0)):
    print(f"{f.kind:9s}" + "  ".join(f"{v:9.3g}" for v in f.s(lam, t)))

# Grid certificates approach the closed-form suprema once the critical
# points of t^a r_lam(t) are added to the grid.
lams = np.geomspace(1e-6, 1, 61)
ts = np.concatenate([[0.0], np.geomspace(1e-10, 1e2, 241)])
for f in (FilterFunction.tikhonov(), FilterFunction.tsvd()):
    cert = certify_constants(f, lams, ts, a_list=(0.5,))
    print(f"{f.kind}: certified D={cert.D:.9f} E={cert.E:.9f} C_1/2={cert.C_a(0.5):.9f}; "
          f"closed form {analytic_constants(f)}")
