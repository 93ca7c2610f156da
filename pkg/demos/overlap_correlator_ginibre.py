"""Measure the eigenvector overlap correlator of the Ginibre ensemble.

Draws a modest Monte Carlo sample, bins the diagonal overlaps O_ii by
eigenvalue modulus, and prints the binned estimator next to the limiting
law O(r) = (1 - r^2) / pi. Runs in a few seconds.
"""

import numpy as np

from eigenring import (
    Combine,
    EnsembleSpec,
    FactorKind,
    FactorSpec,
    GinibreProduct,
    RadialGrid,
    RadialProfile,
    SeedPolicy,
    accumulate,
    eig_full,
    overlap_correlator,
    overlaps_diagonal,
    realize,
    standard_errors,
)

DIM, SAMPLES, SEED = 128, 40, 1

spec = EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), DIM)
policy = SeedPolicy(SEED)
grid = RadialGrid.uniform(0.0, 1.1, 11)
profile = RadialProfile(grid, DIM)

for index in range(SAMPLES):
    matrix = realize(spec, policy.stream(index))
    accumulate(profile, overlaps_diagonal(eig_full(matrix)))

errors = standard_errors(profile)
law = overlap_correlator(GinibreProduct(1), grid.midpoints)

print(f"Ginibre ensemble, N = {DIM}, {SAMPLES} samples "
      f"({DIM * SAMPLES} eigenvalues)\n")
print(f"{'r':>6} {'count':>7} {'O_hat':>9} {'se':>8} {'(1-r^2)/pi':>11}")
for b in range(grid.bins):
    print(f"{grid.midpoints[b]:6.3f} {int(profile.count[b]):7d} "
          f"{profile.overlap_hat[b]:9.4f} {errors.overlap_se[b]:8.4f} "
          f"{law[b]:11.4f}")

print("\nThe correlator vanishes toward the spectral edge r = 1 even though")
print("individual overlaps grow there like sqrt(N): the density of edge")
print("eigenvalues shrinks faster.")
