"""Dense complex matrix kernel: norms, Hermitian eigendecompositions,
spectral projections, and the defect measurements every construction is
checked against.

Matrices are plain ``numpy.ndarray`` values in row-major layout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL


class DomainError(ValueError):
    """A precondition of an operation was violated."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise DomainError("expected a nonempty 2-d matrix")
    return a


def require_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_defect(m) -> float:
    """max |M_ij - conj(M_ji)|, the absolute deviation from self-adjointness."""
    a = as_matrix(m)
    return float(np.abs(a - a.conj().T).max())


def is_hermitian(m, tol: float | None = None) -> bool:
    a = require_square(m)
    scale = 1.0 + float(np.abs(a).max(initial=0.0))
    if tol is None:
        tol = TOL.hermitian_check
    return hermitian_defect(a) <= tol * scale


def hilbert_schmidt(m) -> float:
    """Unnormalized Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(as_matrix(m)))


def _power_norm_sq(m: np.ndarray) -> float:
    """Largest eigenvalue of M^H M by power iteration (two matvecs a step)."""
    n = m.shape[1]
    scale = float(np.abs(m).max(initial=0.0))
    if scale == 0.0:
        return 0.0
    rng = np.random.default_rng(0x5EED ^ (n << 8) ^ m.shape[0])
    best = 0.0
    for _attempt in range(2):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        theta_prev = -1.0
        plateau = 0
        for _ in range(TOL.power_max_iter):
            w = m.conj().T @ (m @ v)
            theta = float(np.real(np.vdot(v, w)))
            resid = float(np.linalg.norm(w - theta * v))
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                theta = 0.0
                break
            v = w / nw
            if resid <= TOL.power_residual * max(theta, scale * scale * 1e-300):
                break
            # monotone Rayleigh quotient: a hard plateau means the top
            # eigenspace is effectively degenerate and theta is converged
            if theta - theta_prev <= 1e-15 * max(theta, 1e-300):
                plateau += 1
                if plateau >= 4:
                    break
            else:
                plateau = 0
            theta_prev = theta
        best = max(best, theta)
    return best


def _lanczos_norm_sq(m: np.ndarray) -> float | None:
    """Largest eigenvalue of M^H M through ARPACK with a deterministic
    start; None when the solver is unavailable."""
    try:
        from scipy.sparse.linalg import LinearOperator, eigsh
    except ImportError:  # pragma: no cover
        return None
    n = m.shape[1]
    gram = LinearOperator((n, n), matvec=lambda v: m.conj().T @ (m @ v), dtype=complex)
    rng = np.random.default_rng(0x5EED ^ (n << 8) ^ m.shape[0])
    v0 = rng.standard_normal(n)
    try:
        vals = eigsh(gram, k=1, which="LA", v0=v0, tol=1e-13,
                     maxiter=50 * n, return_eigenvectors=False)
    except Exception:
        return None
    return float(max(vals[0], 0.0))


def op_norm(m) -> float:
    """Operator norm (largest singular value).

    Small matrices go through a full decomposition; large ones use an
    iterative extreme-eigenvalue solve on M^H M (deterministic start) with
    plain power iteration as the fallback, which stays robust for the
    nearly degenerate spectra the constructions produce.
    """
    a = as_matrix(m)
    if min(a.shape) <= TOL.dense_norm_dim:
        if a.shape[0] > a.shape[1]:
            a = a.conj().T
        return float(np.sqrt(max(np.linalg.eigvalsh(a @ a.conj().T)[-1], 0.0)))
    if float(np.abs(a).max(initial=0.0)) == 0.0:
        return 0.0
    top = _lanczos_norm_sq(a)
    if top is None:
        top = _power_norm_sq(a)
    return float(np.sqrt(top))


def commutator(a, b) -> np.ndarray:
    a = require_square(a)
    b = require_square(b)
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch {a.shape} vs {b.shape}")
    return a @ b - b @ a


def commutator_norm(a, b) -> float:
    """||AB - BA||."""
    return op_norm(commutator(a, b))


def normality_defect(m) -> float:
    """||M^H M - M M^H||, zero exactly for normal matrices."""
    a = require_square(m)
    return op_norm(a.conj().T @ a - a @ a.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with the unitary frame of eigenvectors."""

    eigenvalues: np.ndarray
    frame: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return (self.frame * self.eigenvalues) @ self.frame.conj().T


def hermitian_eig(m) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input may carry float noise off self-adjointness up to the standard
    tolerance; anything beyond that is rejected.
    """
    a = require_square(m)
    if not is_hermitian(a):
        raise DomainError("matrix is not hermitian to tolerance")
    h = (a + a.conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    return SpectralDecomposition(eigenvalues=vals, frame=vecs)


def spectral_projection(decomp: SpectralDecomposition, lo: float, hi: float) -> np.ndarray:
    """Projection onto eigenvectors with eigenvalue in the closed [lo, hi]."""
    if lo > hi:
        raise DomainError("empty interval: lo > hi")
    mask = (decomp.eigenvalues >= lo) & (decomp.eigenvalues <= hi)
    if not mask.any():
        n = decomp.dim
        return np.zeros((n, n), dtype=complex)
    cols = decomp.frame[:, mask]
    return cols @ cols.conj().T
