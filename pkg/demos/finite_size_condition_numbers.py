"""Exact condition-number profile of small Ginibre matrices.

At finite N the mean squared eigenvalue condition number (over N) is known
in closed form: c(r) = 1 - r^2 plus an incomplete-gamma correction that
also covers eigenvalues beyond the limiting spectral edge. This script
reproduces the curve at N = 10 by direct diagonalization.
"""

import numpy as np

from eigenring import (
    Combine,
    EnsembleSpec,
    FactorKind,
    FactorSpec,
    RadialGrid,
    edge_overlap_asymptotic,
    ginibre_condnum_finite_n,
)
from eigenring.runner import ExperimentConfig, run_sample

DIM, SAMPLES, SEED = 10, 8000, 11

config = ExperimentConfig(
    ensemble=EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), DIM),
    n_samples=SAMPLES,
    seed=SEED,
    grid=RadialGrid.uniform(0.0, 1.2, 8),
)
profile = run_sample(config).profile
reference = ginibre_condnum_finite_n(profile.grid.midpoints, DIM)

print(f"Ginibre N = {DIM}, {SAMPLES} samples\n")
print(f"{'r':>6} {'count':>7} {'mean O_ii/N':>12} {'exact':>8}")
for b in range(profile.grid.bins):
    print(f"{profile.grid.midpoints[b]:6.3f} {int(profile.count[b]):7d} "
          f"{profile.kappa2_hat[b]:12.4f} {reference[b]:8.4f}")

print("\nNote the profile stays positive past r = 1: small matrices put")
print("eigenvalues beyond the limiting edge, and the formula tracks them.")

print("\nEdge growth of the mean overlap, exact vs two-term asymptote:")
for n in (100, 1000, 10000):
    exact = n * ginibre_condnum_finite_n(1.0, n)
    print(f"  N = {n:>6}: {exact:9.4f} vs {edge_overlap_asymptotic(n):9.4f}")
