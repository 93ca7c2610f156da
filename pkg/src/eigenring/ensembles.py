"""Samplers for biunitarily invariant ensembles and their compositions.

The Ginibre convention used throughout is entrywise variance 1/N (real and
imaginary parts i.i.d. normal with variance 1/(2N) each), which places the
limiting spectrum on the unit disc so that the radial CDF is F(r) = r^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg as sla

from .errors import SingularFactorError
from .seeding import SampleStream

# Reject an inverse factor whose LU reciprocal condition estimate falls below
# this; near-singular draws are measure zero but numerically possible.
RCOND_REJECT = 1e-14


class FactorKind(str, Enum):
    GINIBRE = "ginibre"
    INVERSE_GINIBRE = "inverse_ginibre"
    HAAR_UNITARY = "haar_unitary"
    TRUNCATED_HAAR = "truncated_haar"


class Combine(str, Enum):
    PRODUCT = "product"
    SUM = "sum"


@dataclass(frozen=True)
class FactorSpec:
    """One factor of a composite ensemble.

    ``kappa`` is the truncation ratio L/N and is consumed only by
    TRUNCATED_HAAR factors.
    """

    kind: FactorKind
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FactorKind(self.kind))
        if self.kind is FactorKind.TRUNCATED_HAAR and not self.kappa > 0:
            raise ValueError("truncated_haar factors require kappa > 0")


@dataclass(frozen=True)
class EnsembleSpec:
    """Declarative description of a product or sum of random factors."""

    combine: Combine
    factors: tuple[FactorSpec, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "combine", Combine(self.combine))
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("at least one factor is required")
        if self.dim < 1:
            raise ValueError("dimension must be a positive integer")
        if self.combine is Combine.SUM and any(
            f.kind is not FactorKind.HAAR_UNITARY for f in self.factors
        ):
            raise ValueError("sum composition supports Haar unitary factors only")


def sample_ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Ginibre matrix with entrywise variance 1/n."""
    scale = 1.0 / np.sqrt(2.0 * n)
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def sample_haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix.

    QR orthonormalization of a complex Gaussian matrix with the diagonal of
    the triangular factor rotated onto the positive reals; without that
    phase fix the factorization is not unique and the result is not Haar.
    """
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_truncated_haar(n: int, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """Top-left n-by-n block of an (n+L)-by-(n+L) Haar unitary, L = round(kappa*n)."""
    removed = int(round(kappa * n))
    if removed < 1:
        raise ValueError("round(kappa * n) must be at least 1")
    u = sample_haar_unitary(n + removed, rng)
    return np.ascontiguousarray(u[:n, :n])


def realize(spec: EnsembleSpec, stream: SampleStream) -> np.ndarray:
    """Draw one matrix of the composite ensemble.

    Product composition multiplies left to right; inverse factors are
    applied through a partial-pivoting linear solve, never by forming an
    explicit inverse and multiplying. Each factor consumes an independent
    substream indexed by its position, so the draw is reproducible for a
    fixed stream regardless of scheduling.

    Raises
    ------
    SingularFactorError
        If an inverse factor's reciprocal condition estimate falls below
        ``RCOND_REJECT``. Callers should reject the draw, count it, and
        resample with a fresh retry stream.
    """
    n = spec.dim
    if spec.combine is Combine.SUM:
        out = np.zeros((n, n), dtype=complex)
        for k in range(len(spec.factors)):
            out += sample_haar_unitary(n, stream.generator(k))
        return out

    out = None
    for k, factor in enumerate(spec.factors):
        rng = stream.generator(k)
        if factor.kind is FactorKind.INVERSE_GINIBRE:
            out = _apply_right_inverse(out, sample_ginibre(n, rng))
            continue
        if factor.kind is FactorKind.GINIBRE:
            x = sample_ginibre(n, rng)
        elif factor.kind is FactorKind.HAAR_UNITARY:
            x = sample_haar_unitary(n, rng)
        else:
            x = sample_truncated_haar(n, factor.kappa, rng)
        out = x if out is None else out @ x
    return out


def _apply_right_inverse(left: np.ndarray | None, x: np.ndarray) -> np.ndarray:
    """left @ inv(x) via an LU solve, rejecting near-singular x."""
    x = np.asarray(x, dtype=complex)
    with warnings.catch_warnings():
        # singular factors are detected below via the rcond estimate
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(x, check_finite=False)
    rcond, _ = sla.lapack.zgecon(lu, np.linalg.norm(x, 1), norm="1")
    if rcond < RCOND_REJECT:
        raise SingularFactorError(
            f"inverse factor reciprocal condition estimate {rcond:.3e}"
        )
    if left is None:
        return sla.lu_solve((lu, piv), np.eye(x.shape[0], dtype=complex))
    # left @ inv(x) solves x^T z^T = left^T
    return sla.lu_solve((lu, piv), left.T, trans=1).T
