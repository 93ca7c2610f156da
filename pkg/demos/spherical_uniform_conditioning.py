"""Uniform conditioning of the spherical ensemble.

The ratio of two independent Ginibre matrices has eigenvalues spread over
the whole complex plane, yet the conditional mean squared condition number
c(r) = O(r)/rho(r) is exactly constant: every radius is equally sensitive
to perturbations. This script checks that numerically on a log-spaced
radial grid.
"""

import numpy as np

from eigenring import (
    Combine,
    EnsembleSpec,
    FactorKind,
    FactorSpec,
    RadialGrid,
    SphericalProduct,
    conditional_kappa2,
)
from eigenring.runner import ExperimentConfig, run_sample

DIM, SAMPLES, SEED = 150, 60, 5

spec = EnsembleSpec(
    Combine.PRODUCT,
    (FactorSpec(FactorKind.GINIBRE), FactorSpec(FactorKind.INVERSE_GINIBRE)),
    DIM,
)
config = ExperimentConfig(
    ensemble=spec,
    n_samples=SAMPLES,
    seed=SEED,
    grid=RadialGrid.log_spaced(0.2, 4.0, 6),
)
profile = run_sample(config).profile

print(f"Spherical ensemble (Ginibre ratio), N = {DIM}, {SAMPLES} samples\n")
print(f"{'bin':>16} {'count':>7} {'c_hat':>7}   analytic c = "
      f"{conditional_kappa2(SphericalProduct(1), 1.0):.1f} at every radius")
for b in range(profile.grid.bins):
    lo, hi = profile.grid.edges[b], profile.grid.edges[b + 1]
    print(f"[{lo:6.3f},{hi:6.3f}] {int(profile.count[b]):7d} "
          f"{profile.kappa2_hat[b]:7.3f}")

print(f"\nrejected draws (singular inverse factors): {profile.n_rejected}")
print("Inverse factors are applied by partial-pivoting solves and redrawn")
print("if the reciprocal condition estimate falls below 1e-14.")
