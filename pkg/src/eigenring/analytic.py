"""Analytic radial laws for biunitarily invariant ensembles.

The radial cumulative distribution F(r) of each built-in family solves the
functional equation S(F(r) - 1) = 1/r^2, where S is the S-transform of the
squared singular-value distribution. Everything else derives from F:

* overlap correlator  O(r) = F(r) (1 - F(r)) / (pi r^2)
* radial density      rho(r) = F'(r) / (2 pi r)
* conditional squared condition number  c(r) = O(r) / rho(r)

plus the exact finite-size formula for the Ginibre mean squared condition
number and the inverse mapping from the correlator back to F and rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import NotBracketedError, OutsideSupportError, OverlapRangeError

__all__ = [
    "RingSupport",
    "GinibreProduct",
    "TruncatedHaarProduct",
    "SphericalProduct",
    "HaarSum",
    "CustomS",
    "Branch",
    "radial_cdf",
    "radial_density",
    "overlap_correlator",
    "conditional_kappa2",
    "solve_hl",
    "ring_radii",
    "ginibre_condnum_finite_n",
    "edge_overlap_asymptotic",
    "cdf_from_overlap",
    "density_from_overlap",
]


@dataclass(frozen=True)
class RingSupport:
    """Annular support [r_min, r_max]; r_min may be 0, r_max may be inf."""

    r_min: float
    r_max: float

    def __post_init__(self):
        if not 0.0 <= self.r_min <= self.r_max:
            raise ValueError("require 0 <= r_min <= r_max")


def _as_grid(r):
    arr = np.asarray(r, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _maybe_scalar(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


@dataclass(frozen=True)
class GinibreProduct:
    """Product of ``n`` independent Ginibre factors; unit-disc support."""

    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def s_transform(self, z: float) -> float:
        return (1.0 + z) ** (-self.n)

    def support(self) -> RingSupport:
        return RingSupport(0.0, 1.0)

    def _cdf(self, r: np.ndarray) -> np.ndarray:
        return np.where(r >= 1.0, 1.0, np.maximum(r, 0.0) ** (2.0 / self.n))

    def _density(self, r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            inside = r ** (2.0 / self.n - 2.0) / (np.pi * self.n)
        return np.where((r > 0.0) & (r <= 1.0), inside, 0.0)


@dataclass(frozen=True)
class TruncatedHaarProduct:
    """Product of ``n`` truncated Haar factors with truncation ratio ``kappa``."""

    n: int = 1
    kappa: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    def s_transform(self, z: float) -> float:
        return ((self.kappa + 1.0 + z) / (1.0 + z)) ** self.n

    def support(self) -> RingSupport:
        return RingSupport(0.0, (1.0 + self.kappa) ** (-self.n / 2.0))

    def _cdf(self, r: np.ndarray) -> np.ndarray:
        r_max = self.support().r_max
        u = np.maximum(r, 0.0) ** (2.0 / self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = self.kappa * u / (1.0 - u)
        return np.where(r >= r_max, 1.0, inside)

    def _density(self, r: np.ndarray) -> np.ndarray:
        r_max = self.support().r_max
        u = np.maximum(r, 0.0) ** (2.0 / self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = (
                self.kappa / (np.pi * self.n)
                * r ** (2.0 / self.n - 2.0)
                / (1.0 - u) ** 2
            )
        return np.where((r > 0.0) & (r <= r_max), inside, 0.0)


@dataclass(frozen=True)
class SphericalProduct:
    """Product of ``k`` Ginibre factors and ``k`` inverse Ginibre factors.

    The support is the whole plane; the formulas extend the bounded-support
    theory to this unbounded measure.
    """

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def s_transform(self, z: float) -> float:
        return (-z / (1.0 + z)) ** self.k

    def support(self) -> RingSupport:
        return RingSupport(0.0, float("inf"))

    def _cdf(self, r: np.ndarray) -> np.ndarray:
        u = np.maximum(r, 0.0) ** (2.0 / self.k)
        return u / (1.0 + u)

    def _density(self, r: np.ndarray) -> np.ndarray:
        u = np.maximum(r, 0.0) ** (2.0 / self.k)
        with np.errstate(divide="ignore"):
            inside = r ** (2.0 / self.k - 2.0) / (np.pi * self.k * (1.0 + u) ** 2)
        return np.where(r > 0.0, inside, np.where(self.k == 1, 1.0 / np.pi, np.inf))


@dataclass(frozen=True)
class HaarSum:
    """Sum of ``k`` independent Haar unitaries; disc of radius sqrt(k).

    ``k = 1`` degenerates to a single Haar unitary whose spectrum is the
    unit circle (F jumps from 0 to 1 at r = 1).
    """

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def s_transform(self, z: float) -> float:
        return (self.k + z) / (self.k**2 * (1.0 + z))

    def support(self) -> RingSupport:
        if self.k == 1:
            return RingSupport(1.0, 1.0)
        return RingSupport(0.0, math.sqrt(self.k))

    def _cdf(self, r: np.ndarray) -> np.ndarray:
        k = float(self.k)
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = r**2 * (k - 1.0) / (k**2 - r**2)
        return np.where(r >= math.sqrt(k), 1.0, inside)

    def _density(self, r: np.ndarray) -> np.ndarray:
        if self.k == 1:
            # spectrum concentrates on the unit circle; no absolutely
            # continuous radial density exists
            return np.zeros_like(r)
        k = float(self.k)
        with np.errstate(divide="ignore"):
            inside = k**2 * (k - 1.0) / (np.pi * (k**2 - r**2) ** 2)
        return np.where((r > 0.0) & (r <= math.sqrt(k)), inside, 0.0)


class CustomS:
    """Model defined by a user-supplied monotone S-transform on (-1, 0).

    The radial CDF is obtained pointwise from the functional equation via
    ``solve_hl``; the density uses central differences with relative step
    1e-6, accurate to about 1e-8, which is far below Monte Carlo noise.
    """

    def __init__(self, s: Callable[[float], float], support: RingSupport | None = None):
        self._s = s
        self._support = ring_radii(s) if support is None else support

    def s_transform(self, z: float) -> float:
        return self._s(z)

    def support(self) -> RingSupport:
        return self._support

    def _cdf(self, r: np.ndarray) -> np.ndarray:
        sup = self._support
        out = np.empty_like(r)
        for i, ri in enumerate(r):
            if ri <= sup.r_min:
                out[i] = 0.0
            elif ri >= sup.r_max:
                out[i] = 1.0
            else:
                out[i] = solve_hl(self._s, float(ri))
        return out

    def _density(self, r: np.ndarray) -> np.ndarray:
        sup = self._support
        out = np.zeros_like(r)
        for i, ri in enumerate(r):
            if not sup.r_min < ri < sup.r_max:
                continue
            h = 1e-6 * ri
            lo = max(float(ri - h), sup.r_min)
            hi = float(ri + h)
            if math.isfinite(sup.r_max):
                hi = min(hi, sup.r_max)
            # solve to machine width: the difference quotient divides by 2h,
            # so solver noise at the default tolerance would dominate
            f_lo = 0.0 if lo <= sup.r_min else solve_hl(self._s, lo, tol=1e-15)
            f_hi = 1.0 if hi >= sup.r_max else solve_hl(self._s, hi, tol=1e-15)
            out[i] = (f_hi - f_lo) / (hi - lo) / (2.0 * np.pi * ri)
        return out


AnalyticModel = GinibreProduct | TruncatedHaarProduct | SphericalProduct | HaarSum | CustomS


def radial_cdf(model, r):
    """Radial cumulative distribution F(r) of the model, clamped to [0, 1]."""
    grid, scalar = _as_grid(r)
    values = np.clip(model._cdf(grid), 0.0, 1.0)
    return _maybe_scalar(values, scalar)


def radial_density(model, r):
    """Radial spectral density rho(r) = F'(r) / (2 pi r); zero outside the ring."""
    grid, scalar = _as_grid(r)
    return _maybe_scalar(model._density(grid), scalar)


def overlap_correlator(model, r):
    """Eigenvector overlap correlator O(r) = F(r)(1 - F(r)) / (pi r^2)."""
    grid, scalar = _as_grid(r)
    f = np.clip(model._cdf(grid), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = f * (1.0 - f) / (np.pi * grid**2)
    values = np.where(grid > 0.0, values, 0.0)
    return _maybe_scalar(values, scalar)


def conditional_kappa2(model, r):
    """Conditional mean of the squared condition number over N, c(r) = O(r)/rho(r).

    Raises
    ------
    OutsideSupportError
        If the density vanishes at any requested radius.
    """
    grid, scalar = _as_grid(r)
    rho = model._density(grid)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise OutsideSupportError("density vanishes at a requested radius")
    values = overlap_correlator(model, grid) / rho
    return _maybe_scalar(values, scalar)


def _equation_residual(s, f: float, target: float) -> float:
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        value = float(s(f - 1.0))
    if math.isnan(value):
        raise ValueError(f"S-transform returned NaN at z = {f - 1.0!r}")
    return value - target


def solve_hl(s, r: float, *, tol: float = 1e-12) -> float:
    """Solve S(F - 1) = 1/r^2 for F in (0, 1) by bisection.

    Bisection is guaranteed to converge because S-transforms of positive
    operators are monotone on (-1, 0); speed is irrelevant at the grid
    sizes involved.

    Raises
    ------
    NotBracketedError
        If the residual has no sign change on (0, 1), signalling a radius
        outside the ring.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    target = 1.0 / (r * r)
    lo, hi = 1e-15, 1.0 - 1e-15
    f_lo = _equation_residual(s, lo, target)
    f_hi = _equation_residual(s, hi, target)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NotBracketedError(f"no root of S(F-1) = 1/r^2 in (0, 1) at r = {r}")
    lo_positive = f_lo > 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _equation_residual(s, mid, target)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == lo_positive:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def _endpoint_limit(s, at_zero: bool) -> float:
    """One-sided limit of S at 0- or at (-1)+ by extrapolation.

    Returns inf for divergent limits and 0.0 for vanishing ones, detected
    from the growth ratio across decade-spaced offsets.
    """
    offsets = (1e-4, 1e-6, 1e-8)
    values = []
    for eps in offsets:
        z = -eps if at_zero else -1.0 + eps
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            values.append(float(s(z)))
    if not all(math.isfinite(v) for v in values) or values[-1] > 1e14:
        return float("inf")
    v1, v2 = values[-2], values[-1]
    if v1 > 0 and v2 / v1 > 10.0:
        return float("inf")
    if v1 > 0 and v2 / v1 < 0.1:
        return 0.0
    # convergent: linear extrapolation to offset -> 0 from the last two points
    e1, e2 = offsets[-2], offsets[-1]
    return v2 + (v2 - v1) * e2 / (e1 - e2)


def _radius_from_limit(limit: float) -> float:
    if limit <= 1e-12:
        return float("inf")
    if not math.isfinite(limit):
        return 0.0
    return limit**-0.5


def ring_radii(s) -> RingSupport:
    """Support radii from the S-transform endpoint limits.

    ``r_max = S(0-)^(-1/2)`` and ``r_min = S(-1+)^(-1/2)``; divergent limits
    map to radius 0 and vanishing limits to radius inf. Built-in models may
    be passed directly, in which case their exact support is returned.
    """
    if hasattr(s, "support"):
        return s.support()
    r_max = _radius_from_limit(_endpoint_limit(s, at_zero=True))
    r_min = _radius_from_limit(_endpoint_limit(s, at_zero=False))
    return RingSupport(r_min, r_max)


# --- exact finite-size Ginibre formula ------------------------------------

_SERIES_TOL = 1e-16
_CF_TOL = 1e-15
_MAX_ITER = 5000


def _lower_series_sum(a: float, x: float) -> float:
    """sum_k x^k / (a (a+1) ... (a+k)); P(a,x) = prefactor * sum."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _SERIES_TOL:
            return total
    raise RuntimeError("incomplete gamma series did not converge")


def _upper_continued_fraction(a: float, x: float) -> float:
    """Modified Lentz evaluation of Gamma(a,x) e^x x^(-a); Q(a,x) = prefactor * cf."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise RuntimeError("incomplete gamma continued fraction did not converge")


def regularized_upper_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).

    Series below x = a + 1, continued fraction above, evaluated with a
    log-space prefactor so large arguments neither overflow nor underflow
    prematurely.
    """
    if a <= 0 or x < 0:
        raise ValueError("require a > 0 and x >= 0")
    if x == 0.0:
        return 1.0
    log_pre = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        return 1.0 - _lower_series_sum(a, x) * math.exp(log_pre)
    return _upper_continued_fraction(a, x) * math.exp(log_pre)


def _condnum_scalar(r: float, n: int) -> float:
    x = n * r * r
    if x == 0.0:
        return 1.0
    if x >= n + 1.0:
        # correction = prefactor / (n Q) with Q = prefactor * cf: the
        # prefactors cancel exactly, so nothing large is ever exponentiated
        correction = 1.0 / (n * _upper_continued_fraction(float(n), x))
    else:
        log_pre = n * math.log(x) - x - math.lgamma(n)
        q = 1.0 - _lower_series_sum(float(n), x) * math.exp(log_pre)
        correction = math.exp(log_pre) / (n * q)
    return 1.0 - r * r + correction


def ginibre_condnum_finite_n(r, n: int):
    """Mean squared condition number over N for the N = ``n`` Ginibre ensemble.

    Exact at every matrix size: c(r) = 1 - r^2 plus a correction built from
    the regularized upper incomplete gamma at x = n r^2. Safe up to
    n = 10^4 and r = 10 by log-space evaluation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid, scalar = _as_grid(r)
    values = np.array([_condnum_scalar(float(ri), int(n)) for ri in grid])
    return _maybe_scalar(values, scalar)


def edge_overlap_asymptotic(n: int) -> float:
    """Large-size mean diagonal overlap conditioned on |lambda| = 1 (Ginibre).

    Two leading terms, sqrt(2/pi) sqrt(n) + 2/(3 pi); the truncation error
    is O(n^(-1/2)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(2.0 / math.pi) * math.sqrt(n) + 2.0 / (3.0 * math.pi)


# --- correlator -> (F, rho) mapping ----------------------------------------


class Branch(str, Enum):
    """Square-root branch of the overlap -> CDF mapping.

    LOWER applies from the inner rim (F = 0) up to F = 1/2; UPPER from
    F = 1/2 out to the outer rim (F = 1). The switch happens where
    4 pi r^2 O(r) reaches 1.
    """

    LOWER = "lower"
    UPPER = "upper"


def _discriminant(r, overlap):
    s = 4.0 * np.pi * np.asarray(r, dtype=float) ** 2 * np.asarray(overlap, dtype=float)
    if np.any(s > 1.0 + 1e-6):
        raise OverlapRangeError("4 pi r^2 O exceeds 1 beyond tolerance")
    return 1.0 - np.minimum(s, 1.0)


def cdf_from_overlap(r, overlap, branch: Branch):
    """Invert O(r) = F(1-F)/(pi r^2) for F on the requested branch.

    Raises
    ------
    OverlapRangeError
        If 4 pi r^2 O exceeds 1 by more than 1e-6 (no real solution).
    """
    branch = Branch(branch)
    scalar = np.asarray(r).ndim == 0 and np.asarray(overlap).ndim == 0
    grid, _ = _as_grid(r)
    q = _discriminant(grid, overlap)
    root = np.sqrt(q)
    f = 0.5 * (1.0 - root) if branch is Branch.LOWER else 0.5 * (1.0 + root)
    return _maybe_scalar(np.atleast_1d(f), scalar)


def density_from_overlap(r, overlap, d_overlap_dr, branch: Branch):
    """Radial density from the correlator and its radial derivative.

    rho = +-(2 O + r dO/dr) / (2 sqrt(1 - 4 pi r^2 O)), positive sign on the
    LOWER branch. Where the square root vanishes (|1 - 4 pi r^2 O| < 1e-10,
    the branch point) the value is flagged as NaN rather than raising:
    callers decide how to treat the switching bin.
    """
    branch = Branch(branch)
    scalar = np.asarray(r).ndim == 0 and np.asarray(overlap).ndim == 0
    grid, _ = _as_grid(r)
    q = _discriminant(grid, overlap)
    overlap = np.broadcast_to(np.asarray(overlap, dtype=float), grid.shape)
    slope = np.broadcast_to(np.asarray(d_overlap_dr, dtype=float), grid.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (2.0 * overlap + grid * slope) / (2.0 * np.sqrt(q))
    if branch is Branch.UPPER:
        values = -values
    values = np.where(np.abs(q) < 1e-10, np.nan, values)
    return _maybe_scalar(np.atleast_1d(values), scalar)
