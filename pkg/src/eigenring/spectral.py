"""Non-hermitian eigendecomposition, diagonal overlaps, and the regularized resolvent."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import IllConditionedSimilarityError, SingularKernelError

# Samples whose biorthonormality defect exceeds this are excluded from
# statistics; coalescing eigenvalues have probability zero but finite
# precision occasionally produces a near-defective draw.
BIORTHOGONALITY_TOL = 1e-6


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition with biorthonormal left/right eigenvectors.

    Right eigenvectors are the columns of ``right``; left eigenvectors are
    the rows of ``left``, normalized so that ``left @ right`` is the
    identity. Quality diagnostics are first-class outputs: callers decide
    how much to trust a sample.

    Attributes
    ----------
    values : ndarray
        Eigenvalues, in solver order.
    right, left : ndarray
        Eigenvector matrices as described above.
    residual : float
        Max-norm of ``X @ right - right * values``.
    biorthogonality_defect : float
        Max-norm of ``left @ right - I``.
    right_condition : float
        1-norm condition estimate of the right-eigenvector matrix.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residual: float
    biorthogonality_defect: float
    right_condition: float

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class OverlapRecord:
    """Eigenvalue paired with its diagonal overlap and condition number."""

    eigenvalue: complex
    overlap: float
    condition: float


@dataclass(frozen=True)
class QuaternionResolvent:
    """2x2 generalized resolvent evaluated at one (z, w) point.

    ``kernel_trace_1`` and ``kernel_trace_2`` are the traces of the inverses
    of the two hermitized kernels; the off-diagonal entries are rescalings
    of them by the regulator w.
    """

    g11: complex
    g12: complex
    g21: complex
    g22: complex
    kernel_trace_1: float
    kernel_trace_2: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g21, self.g22]])


def eig_full(x: np.ndarray, *, defect_tol: float = BIORTHOGONALITY_TOL) -> EigenSystem:
    """Full eigendecomposition of a dense complex matrix.

    Right eigenvectors come from the standard dense nonsymmetric solver.
    Left eigenvectors are obtained as the rows of the inverse of the
    right-eigenvector matrix (a single LU solve), which enforces the
    biorthonormalization exactly up to solve error and sidesteps any
    eigenvalue-matching between two separate decompositions.

    Raises
    ------
    IllConditionedSimilarityError
        If the biorthogonality defect exceeds ``defect_tol``. Such samples
        should be counted and excluded from statistics.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    values, right = np.linalg.eig(x)
    with warnings.catch_warnings():
        # a (near-)singular eigenvector matrix surfaces through the defect check
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(right, check_finite=False)
    rcond, _ = sla.lapack.zgecon(lu, np.linalg.norm(right, 1), norm="1")
    left = sla.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)
    defect = float(np.abs(left @ right - np.eye(n)).max())
    if not np.isfinite(defect) or defect > defect_tol:
        raise IllConditionedSimilarityError(
            f"biorthogonality defect {defect:.3e} exceeds {defect_tol:.1e}"
        )
    residual = float(np.abs(x @ right - right * values).max())
    condition = float(1.0 / rcond) if rcond > 0 else float("inf")
    return EigenSystem(values, right, left, residual, defect, condition)


def diagonal_overlaps(es: EigenSystem) -> np.ndarray:
    """O_ii = (squared norm of row i of left) * (squared norm of column i of right)."""
    left_sq = (es.left.real**2 + es.left.imag**2).sum(axis=1)
    right_sq = (es.right.real**2 + es.right.imag**2).sum(axis=0)
    return left_sq * right_sq


def overlaps_diagonal(es: EigenSystem) -> list[OverlapRecord]:
    """Per-eigenvalue overlap records for an accepted sample."""
    overlaps = diagonal_overlaps(es)
    return [
        OverlapRecord(complex(v), float(o), float(np.sqrt(o)))
        for v, o in zip(es.values, overlaps)
    ]


def quaternion_resolvent(x: np.ndarray, z: complex, w: complex) -> QuaternionResolvent:
    """Generalized resolvent of the hermitized spectral problem at (z, w).

    Works with the positive-definite N x N kernels
    ``K1 = (z-X)(zbar-Xdag) + |w|^2`` and ``K2 = (zbar-Xdag)(z-X) + |w|^2``
    through Cholesky solves; the doubled 2N x 2N block inverse is never
    formed. For ``w = 0`` the kernels are positive definite only when z is
    away from the spectrum.

    Raises
    ------
    SingularKernelError
        If the kernel factorization fails (possible only at ``|w| = 0`` on
        the spectrum).
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    eye = np.eye(n, dtype=complex)
    a = z * eye - x
    ah = a.conj().T
    reg = abs(w) ** 2
    k1 = a @ ah + reg * eye
    k2 = ah @ a + reg * eye
    try:
        c1 = sla.cho_factor(k1, lower=False, check_finite=False)
        c2 = sla.cho_factor(k2, lower=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularKernelError(f"hermitized kernel not positive definite: {exc}") from None
    k1_inv = sla.cho_solve(c1, eye, check_finite=False)
    k2_inv = sla.cho_solve(c2, eye, check_finite=False)
    t1 = float(np.trace(k1_inv).real)
    t2 = float(np.trace(k2_inv).real)
    g11 = complex(np.einsum("ij,ji->", ah, k1_inv)) / n
    g22 = complex(np.einsum("ij,ji->", a, k2_inv)) / n
    g12 = np.conj(w) * t1 / n
    g21 = -w * t2 / n
    return QuaternionResolvent(g11, g12, g21, g22, t1, t2)


def resolvent_symmetry_check(x: np.ndarray, z: complex, w: complex, h: float) -> float:
    """Defect |d_w G11 - d_z G12| from second-order central differences.

    Wirtinger derivatives are assembled from the real/imaginary direction
    stencils, d_w f = (d_{Re w} f - i d_{Im w} f) / 2, so the returned
    defect shrinks as O(h^2) when the cross-derivative identity holds.
    """

    def g11(zz, ww):
        return quaternion_resolvent(x, zz, ww).g11

    def g12(zz, ww):
        return quaternion_resolvent(x, zz, ww).g12

    d_re = (g11(z, w + h) - g11(z, w - h)) / (2.0 * h)
    d_im = (g11(z, w + 1j * h) - g11(z, w - 1j * h)) / (2.0 * h)
    dw_g11 = 0.5 * (d_re - 1j * d_im)

    d_re = (g12(z + h, w) - g12(z - h, w)) / (2.0 * h)
    d_im = (g12(z + 1j * h, w) - g12(z - 1j * h, w)) / (2.0 * h)
    dz_g12 = 0.5 * (d_re - 1j * d_im)

    return float(abs(dw_g11 - dz_g12))
