"""Analytic radial laws for the four built-in ensemble families.

For each model the radial CDF solves S(F(r) - 1) = 1/r^2 with S the
S-transform of the squared singular-value distribution, and the overlap
correlator follows as O(r) = F(1-F)/(pi r^2). This script prints short
prediction tables and verifies the closed forms against the generic
bisection solver on the fly.
"""

import numpy as np

from eigenring import (
    GinibreProduct,
    HaarSum,
    SphericalProduct,
    TruncatedHaarProduct,
    predict_rows,
    radial_cdf,
    ring_radii,
    solve_hl,
)

MODELS = [
    ("product of 2 Ginibre factors", GinibreProduct(2), np.linspace(0.1, 1.0, 7)),
    ("truncated Haar, kappa = 1", TruncatedHaarProduct(1, 1.0), np.linspace(0.1, 0.7, 7)),
    ("spherical (Ginibre ratio)", SphericalProduct(1), np.geomspace(0.2, 4.0, 7)),
    ("sum of 3 Haar unitaries", HaarSum(3), np.linspace(0.2, 1.7, 7)),
]

for name, model, radii in MODELS:
    support = ring_radii(model)
    print(f"\n=== {name}: support [{support.r_min:g}, {support.r_max:g}] ===")
    print(f"{'r':>7} {'F':>8} {'rho':>9} {'O':>9} {'c':>8}")
    for row in predict_rows(model, radii):
        print(f"{row['r']:7.3f} {row['F']:8.4f} {row['rho']:9.4f} "
              f"{row['O']:9.4f} {row['c']:8.4f}")

    inside = radii[(radii > support.r_min) & (radii < support.r_max)]
    solved = np.array([solve_hl(model.s_transform, float(r)) for r in inside])
    gap = np.abs(solved - radial_cdf(model, inside)).max()
    print(f"closed form vs functional-equation solver: max gap {gap:.2e}")

print("\nThe spherical family is 'uniformly conditioned': its c column is")
print("constant, so squared condition numbers scale the same way at every")
print("radius of the (unbounded) spectrum.")
