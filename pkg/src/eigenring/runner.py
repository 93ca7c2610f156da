"""Experiment driver: configuration, seeded parallel sampling, reports.

Outputs are a pure function of (config, seed): per-sample streams are keyed
by sample index, rejected draws are redrawn from per-index retry streams,
and partial results are reduced in sample-index order, so worker count
never changes a byte of the output.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic
from .analytic import (
    GinibreProduct,
    HaarSum,
    SphericalProduct,
    TruncatedHaarProduct,
)
from .ensembles import Combine, EnsembleSpec, FactorKind, FactorSpec, realize
from .errors import (
    ConfigError,
    IllConditionedSimilarityError,
    RejectionCapError,
    SingularFactorError,
)
from .seeding import SeedPolicy
from .spectral import (
    diagonal_overlaps,
    eig_full,
    quaternion_resolvent,
    resolvent_symmetry_check,
)
from .stats import ComparisonReport, RadialGrid, RadialProfile, bulk_mask, compare

# A sample index may be redrawn at most this many times before the run
# aborts; keeps the total draw count at or below RETRIES_PER_SAMPLE * M.
RETRIES_PER_SAMPLE = 3

CSV_COLUMNS = [
    "r_lo", "r_hi", "r_mid", "count",
    "rho_hat", "rho_se", "rho_analytic",
    "O_hat", "O_se", "O_analytic",
    "c_hat", "c_analytic", "in_bulk",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one sampling experiment."""

    ensemble: EnsembleSpec
    n_samples: int
    seed: int
    model: object | None = None          # None: derive from the ensemble
    grid: RadialGrid | None = None       # None: default for the model support
    c_edge: float = 3.0
    workers: int = 1
    out_dir: str | None = None
    dump_samples: bool = False
    max_overlap_error: float | None = None
    max_rho_error: float | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("samples must be a positive integer")
        if self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if self.c_edge < 0:
            raise ConfigError("c_edge must be nonnegative")


def model_for_ensemble(spec: EnsembleSpec):
    """Analytic model matching a built-in ensemble family.

    Resolves the four built-in families (plus the degenerate all-Haar
    product); mixed compositions need an explicit model, for instance a
    CustomS with the composite S-transform.
    """
    kinds = [f.kind for f in spec.factors]
    if spec.combine is Combine.SUM:
        return HaarSum(len(kinds))
    if all(k is FactorKind.HAAR_UNITARY for k in kinds):
        # a product of Haar unitaries is itself Haar: unit-circle spectrum
        return HaarSum(1)
    if all(k is FactorKind.GINIBRE for k in kinds):
        return GinibreProduct(len(kinds))
    if all(k is FactorKind.TRUNCATED_HAAR for k in kinds):
        kappas = {f.kappa for f in spec.factors}
        if len(kappas) != 1:
            raise ConfigError("truncated factors must share one kappa for auto model")
        return TruncatedHaarProduct(len(kinds), kappas.pop())
    n_gin = sum(k is FactorKind.GINIBRE for k in kinds)
    n_inv = sum(k is FactorKind.INVERSE_GINIBRE for k in kinds)
    if n_gin == n_inv and n_gin + n_inv == len(kinds):
        return SphericalProduct(n_gin)
    raise ConfigError(
        "no built-in analytic model for this ensemble; provide one explicitly"
    )


# --- config (de)serialization ----------------------------------------------

_FAMILIES = {
    "ginibre_product": lambda d: GinibreProduct(int(d.get("n", 1))),
    "truncated_haar_product": lambda d: TruncatedHaarProduct(
        int(d.get("n", 1)), float(d["kappa"])
    ),
    "spherical": lambda d: SphericalProduct(int(d.get("k", 1))),
    "haar_sum": lambda d: HaarSum(int(d.get("k", 1))),
}


def model_from_dict(data) -> object:
    if not isinstance(data, dict) or "family" not in data:
        raise ConfigError("model must be 'auto' or an object with a 'family' key")
    family = data["family"]
    if family not in _FAMILIES:
        raise ConfigError(f"unknown model family {family!r}")
    try:
        return _FAMILIES[family](data)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad parameters for model family {family!r}: {exc}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from parsed JSON, validating as it goes."""
    try:
        ens = data["ensemble"]
        factors = tuple(
            FactorSpec(FactorKind(f["kind"]), float(f.get("kappa", 0.0)))
            for f in ens["factors"]
        )
        spec = EnsembleSpec(Combine(ens["combine"]), factors, int(ens["dimension"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad ensemble section: {exc}") from None

    model_field = data.get("model", "auto")
    model = None if model_field == "auto" else model_from_dict(model_field)

    grid = None
    if "grid" in data:
        g = data["grid"]
        try:
            maker = RadialGrid.log_spaced if g.get("spacing") == "log" else RadialGrid.uniform
            grid = maker(float(g["lo"]), float(g["hi"]), int(g["bins"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid section: {exc}") from None

    thresholds = data.get("thresholds", {})
    try:
        return ExperimentConfig(
            ensemble=spec,
            n_samples=int(data["samples"]),
            seed=int(data["seed"]),
            model=model,
            grid=grid,
            c_edge=float(data.get("c_edge", 3.0)),
            workers=int(data.get("workers", 1)),
            out_dir=data.get("out_dir"),
            dump_samples=bool(data.get("dump_samples", False)),
            max_overlap_error=thresholds.get("sup_overlap"),
            max_rho_error=thresholds.get("sup_rho"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(data)


# --- sampling ----------------------------------------------------------------


def _resolve(config: ExperimentConfig):
    model = config.model if config.model is not None else model_for_ensemble(config.ensemble)
    grid = config.grid if config.grid is not None else RadialGrid.for_support(
        analytic.ring_radii(model)
    )
    return model, grid


def sample_overlaps(spec: EnsembleSpec, seed: int, index: int):
    """One accepted draw for a sample index: (eigenvalues, overlaps, rejected_draws).

    Rejected draws (singular inverse factor or an ill-conditioned
    eigenvector matrix) are redrawn from the retry stream of the same
    index, so acceptance never depends on other samples.

    Raises
    ------
    RejectionCapError
        If RETRIES_PER_SAMPLE consecutive draws were rejected.
    """
    policy = SeedPolicy(seed)
    rejected = 0
    for retry in range(RETRIES_PER_SAMPLE):
        try:
            x = realize(spec, policy.stream(index, retry))
            es = eig_full(x)
        except (SingularFactorError, IllConditionedSimilarityError):
            rejected += 1
            continue
        return es.values, diagonal_overlaps(es), rejected
    raise RejectionCapError(
        f"sample index {index} exhausted {RETRIES_PER_SAMPLE} draws"
    )


def _sample_task(args):
    spec, seed, edges, dump, index = args
    values, overlaps, rejected = sample_overlaps(spec, seed, index)
    grid = RadialGrid(edges)
    idx = grid.bin_index(np.abs(values))
    ok = idx >= 0
    counts = np.bincount(idx[ok], minlength=grid.bins).astype(float)
    sums = np.bincount(idx[ok], weights=overlaps[ok], minlength=grid.bins)
    raw = (values, overlaps) if dump else None
    return counts, sums, int(np.count_nonzero(~ok)), rejected, raw


@dataclass(frozen=True)
class SampleRunResult:
    profile: RadialProfile
    report: ComparisonReport
    report_path: Path | None
    summary_path: Path | None
    samples_path: Path | None
    summary: dict


def run_sample(config: ExperimentConfig) -> SampleRunResult:
    """Realize, decompose, and accumulate ``n_samples`` draws.

    Deterministic for fixed (config, seed) independent of ``workers``: the
    reduction happens in sample-index order whatever the pool does.
    """
    model, grid = _resolve(config)
    spec = config.ensemble
    profile = RadialProfile(grid, spec.dim)
    tasks = [
        (spec, config.seed, grid.edges, config.dump_samples, i)
        for i in range(config.n_samples)
    ]
    dump_rows: list[tuple[int, np.ndarray, np.ndarray]] = []

    if config.workers == 1:
        results = map(_sample_task, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=config.workers)
        chunk = max(1, config.n_samples // (config.workers * 8))
        results = pool.map(_sample_task, tasks, chunksize=chunk)

    try:
        for i, (counts, sums, n_out, rejected, raw) in enumerate(results):
            profile.add_binned_sample(counts, sums, n_out)
            profile.n_rejected += rejected
            if raw is not None:
                dump_rows.append((i, raw[0], raw[1]))
    finally:
        if config.workers > 1:
            pool.shutdown()

    report = compare(profile, model, config.c_edge, require_bulk=False)
    summary = _summary_dict(report, config, profile)

    report_path = summary_path = samples_path = None
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.csv"
        summary_path = out / "summary.json"
        write_report_csv(report_path, report)
        write_summary(summary_path, summary)
        if config.dump_samples:
            samples_path = out / "samples.csv"
            _write_samples_csv(samples_path, dump_rows)
    return SampleRunResult(profile, report, report_path, summary_path, samples_path, summary)


def _summary_dict(report: ComparisonReport, config: ExperimentConfig,
                  profile: RadialProfile) -> dict:
    summary = report.summary()
    summary["seed"] = config.seed
    summary["out_of_grid"] = profile.out_of_grid
    summary["status"] = _threshold_status(report, config)
    return summary


def _threshold_status(report: ComparisonReport, config: ExperimentConfig) -> str:
    checks = []
    if config.max_overlap_error is not None:
        checks.append(report.bulk_sup_err_overlap <= config.max_overlap_error)
    if config.max_rho_error is not None:
        checks.append(report.bulk_sup_err_rho <= config.max_rho_error)
    return "pass" if all(checks) else "fail"


# --- file output ---------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    return format(float(value), ".12g")


def write_report_csv(path: str | Path, report: ComparisonReport) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows():
        lines.append(",".join(_fmt(row[col]) for col in CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(path: str | Path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _write_samples_csv(path: Path, rows) -> None:
    lines = ["sample_index,i,re_lambda,im_lambda,O_ii"]
    for index, values, overlaps in rows:
        for i in range(values.shape[0]):
            lines.append(
                f"{index},{i},{_fmt(values[i].real)},{_fmt(values[i].imag)},"
                f"{_fmt(overlaps[i])}"
            )
    path.write_text("\n".join(lines) + "\n")


# --- prediction tables ---------------------------------------------------------


def predict_rows(model, radii: np.ndarray) -> list[dict]:
    """Analytic table (r, F, rho, O, c); c is NaN where the density vanishes."""
    radii = np.asarray(radii, dtype=float)
    f = analytic.radial_cdf(model, radii)
    rho = analytic.radial_density(model, radii)
    overlap = analytic.overlap_correlator(model, radii)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa2 = np.where(rho > 0, overlap / rho, np.nan)
    return [
        {"r": radii[i], "F": f[i], "rho": rho[i], "O": overlap[i], "c": kappa2[i]}
        for i in range(radii.size)
    ]


def write_predict_csv(path_or_buffer, rows: list[dict]) -> None:
    lines = ["r,F,rho,O,c"]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in ("r", "F", "rho", "O", "c")))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buffer, "write"):
        path_or_buffer.write(text)
    else:
        Path(path_or_buffer).write_text(text)


# --- comparison of stored tables -------------------------------------------------


def load_report_csv(path: str | Path) -> list[dict]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        row = {}
        for key, part in zip(header, parts):
            row[key] = int(part) if key in ("count", "in_bulk") else float(part)
        rows.append(row)
    return rows


def compare_table(rows: list[dict], dim: int, model, c_edge: float = 3.0) -> dict:
    """Re-evaluate stored binned estimates against a model.

    Returns the summary error norms over the recomputed bulk mask; used by
    the compare subcommand on a previously written report CSV.
    """
    edges = np.array([r["r_lo"] for r in rows] + [rows[-1]["r_hi"]])
    grid = RadialGrid(edges)
    support = analytic.ring_radii(model)
    mids = grid.midpoints
    rho_a = analytic.radial_density(model, mids)
    overlap_a = analytic.overlap_correlator(model, mids)
    mask = bulk_mask(grid, support, dim, c_edge)
    if not np.any(mask):
        raise ConfigError("no bin lies fully inside the bulk window")
    rho_err = np.array([r["rho_hat"] for r in rows]) - rho_a
    overlap_err = np.array([r["O_hat"] for r in rows]) - overlap_a
    return {
        "N": dim,
        "bulk_sup_err_O": float(np.abs(overlap_err[mask]).max()),
        "bulk_l2_err_O": float(np.sqrt(np.mean(overlap_err[mask] ** 2))),
        "bulk_sup_err_rho": float(np.abs(rho_err[mask]).max()),
    }


# --- deterministic oracle suite ---------------------------------------------------

# Arbitrary-precision reference values for the finite-size formula, frozen
# from an independent 50-digit evaluation of the incomplete gamma.
CONDNUM_REFERENCE = [
    (1, 0.7, 1.0),
    (2, 1.2, 0.62886597938144331),
    (10, 0.5, 0.75021578503292672),
    (10, 1.0, 0.27320794385537412),
    (10, 1.2, 0.20166395317256967),
    (100, 0.9, 0.19513565401237098),
    (100, 1.0, 0.081900345978618535),
    (1000, 1.0, 0.025443212540365718),
    (10000, 1.0, 0.0080000562008376197),
    (10000, 0.25, 0.9375),
]


@dataclass(frozen=True)
class OracleCheck:
    name: str
    passed: bool
    detail: str


def run_oracle(seed: int = 20260808, *, heavy: bool = True) -> list[OracleCheck]:
    """Deterministic invariant suite; runs in well under a minute.

    ``heavy=False`` skips the single ensemble-averaged resolvent check that
    needs ~10 s of dense solves; everything else is near-instant.
    """
    checks: list[OracleCheck] = []

    def record(name: str, passed: bool, detail: str) -> None:
        checks.append(OracleCheck(name, bool(passed), detail))

    # 2x2 triangular overlap oracle: O_11 = O_22 = 1 + |a|^2 exactly
    a = 2.0
    es = eig_full(np.array([[1.0, a], [0.0, 2.0]], dtype=complex))
    overlaps = diagonal_overlaps(es)[np.argsort(es.values.real)]
    expected = 1.0 + a * a
    err = float(np.abs(overlaps - expected).max())
    record("triangular_2x2_overlap", err < 1e-12, f"max |O_ii - {expected}| = {err:.3e}")

    # finite-size formula against frozen arbitrary-precision values; the
    # worst point sits at x ~ n where the continued fraction converges
    # slowest, still ~1e-11 relative at n = 10^4
    worst = 0.0
    for n, r, ref in CONDNUM_REFERENCE:
        got = analytic.ginibre_condnum_finite_n(r, n)
        worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
    record("condnum_reference_values", worst < 1e-9, f"max rel err = {worst:.3e}")

    # decomposition defects and overlap floor on random samples
    rng_policy = SeedPolicy(seed)
    spec = EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), 64)
    max_defect = max_resid = 0.0
    min_overlap = float("inf")
    for i in range(100):
        x = realize(spec, rng_policy.stream(i))
        es = eig_full(x)
        max_defect = max(max_defect, es.biorthogonality_defect)
        norm = float(np.abs(x).max())
        recon = float(np.abs(x - (es.right * es.values) @ es.left).max())
        max_resid = max(max_resid, recon / norm)
        min_overlap = min(min_overlap, float(diagonal_overlaps(es).min()))
    record("biorthogonality_defect", max_defect <= 1e-8,
           f"max defect over 100 samples = {max_defect:.3e}")
    record("reconstruction_residual", max_resid <= 1e-6,
           f"max relative residual = {max_resid:.3e}")
    record("overlap_floor", min_overlap >= 1.0 - 1e-10,
           f"min O_ii = {min_overlap:.12f}")

    # block-inverse identity -G12 G21 = |w|^2 T1 T2 / N^2, with the traces
    # recomputed independently through a hermitian eigendecomposition
    x = realize(spec, rng_policy.stream(1000))
    z, w = 0.3 + 0.1j, 0.2 + 0.05j
    res = quaternion_resolvent(x, z, w)
    n = x.shape[0]
    eye = np.eye(n)
    amat = z * eye - x
    t1 = float(np.sum(1.0 / np.linalg.eigvalsh(amat @ amat.conj().T + abs(w) ** 2 * eye)))
    t2 = float(np.sum(1.0 / np.linalg.eigvalsh(amat.conj().T @ amat + abs(w) ** 2 * eye)))
    lhs = -res.g12 * res.g21
    rhs = abs(w) ** 2 * t1 * t2 / n**2
    err = abs(lhs - rhs)
    record("resolvent_block_identity", err < 1e-10, f"|G12 G21 + |w|^2 T1 T2/N^2| = {err:.3e}")
    quat = max(abs(res.g22 - np.conj(res.g11)), abs(res.g21 + np.conj(res.g12)))
    record("resolvent_quaternionic_structure", quat < 1e-10, f"defect = {quat:.3e}")

    # cross-derivative symmetry with observed second-order convergence
    small = realize(
        EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), 64),
        rng_policy.stream(2000),
    )
    d1 = resolvent_symmetry_check(small, 0.3 + 0.1j, 0.2, 1e-3)
    d2 = resolvent_symmetry_check(small, 0.3 + 0.1j, 0.2, 5e-4)
    record("resolvent_symmetry_defect", d2 <= 1e-5, f"defect(h=5e-4) = {d2:.3e}")
    ratio = d1 / d2 if d2 > 0 else float("inf")
    record("resolvent_symmetry_order", 2.0 < ratio < 8.0,
           f"defect ratio for h halving = {ratio:.2f} (expect ~4)")

    # functional-equation solver against the quadratic closed form
    radii = np.linspace(0.05, 0.995, 100)
    model = GinibreProduct(1)
    worst = max(abs(analytic.solve_hl(model.s_transform, float(r)) - r * r) for r in radii)
    record("hl_solver_exactness", worst < 1e-10, f"max |F - r^2| = {worst:.3e}")

    # correlator -> CDF round trip on the same grid
    overlap = analytic.overlap_correlator(model, radii)
    branches = [
        analytic.Branch.LOWER if r * r < 0.5 else analytic.Branch.UPPER for r in radii
    ]
    worst = max(
        abs(analytic.cdf_from_overlap(float(r), float(o), b) - r * r)
        for r, o, b in zip(radii, overlap, branches)
    )
    record("overlap_cdf_round_trip", worst < 1e-9, f"max round-trip defect = {worst:.3e}")

    if heavy:
        # ensemble-averaged z G11 at small regulator estimates F(|z|)
        spec512 = EnsembleSpec(Combine.PRODUCT, (FactorSpec(FactorKind.GINIBRE),), 512)
        z, w = 0.5, 1e-3
        total = 0.0 + 0.0j
        m = 50
        for i in range(m):
            xs = realize(spec512, rng_policy.stream(3000 + i))
            total += quaternion_resolvent(xs, z, w).g11
        value = (z * total / m).real
        record("resolvent_cdf_recovery", abs(value - 0.25) <= 0.02,
               f"z G11 averaged over {m} samples = {value:.4f} (target 0.25)")

    return checks
