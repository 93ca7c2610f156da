"""Eigenvector overlap statistics and single-ring spectral laws.

Monte Carlo sampling of biunitarily invariant non-hermitian ensembles,
biorthonormal eigendecompositions with squared eigenvalue condition
numbers, and the analytic radial laws they converge to.
"""

from .analytic import (
    Branch,
    CustomS,
    GinibreProduct,
    HaarSum,
    RingSupport,
    SphericalProduct,
    TruncatedHaarProduct,
    cdf_from_overlap,
    conditional_kappa2,
    density_from_overlap,
    edge_overlap_asymptotic,
    ginibre_condnum_finite_n,
    overlap_correlator,
    radial_cdf,
    radial_density,
    ring_radii,
    solve_hl,
)
from .ensembles import (
    Combine,
    EnsembleSpec,
    FactorKind,
    FactorSpec,
    realize,
    sample_ginibre,
    sample_haar_unitary,
    sample_truncated_haar,
)
from .errors import (
    ConfigError,
    EigenringError,
    EmptyBulkError,
    IllConditionedSimilarityError,
    InsufficientSamplesError,
    NotBracketedError,
    OutsideSupportError,
    OverlapRangeError,
    RejectionCapError,
    SingularFactorError,
    SingularKernelError,
)
from .runner import (
    ExperimentConfig,
    config_from_dict,
    load_config,
    model_for_ensemble,
    predict_rows,
    run_oracle,
    run_sample,
    sample_overlaps,
)
from .seeding import SampleStream, SeedPolicy
from .spectral import (
    EigenSystem,
    OverlapRecord,
    QuaternionResolvent,
    diagonal_overlaps,
    eig_full,
    overlaps_diagonal,
    quaternion_resolvent,
    resolvent_symmetry_check,
)
from .stats import (
    ComparisonReport,
    EdgeScalingFit,
    ProfileErrors,
    RadialGrid,
    RadialProfile,
    accumulate,
    compare,
    edge_scaling_fit,
    merge_profiles,
    standard_errors,
)

__version__ = "0.1.0"
