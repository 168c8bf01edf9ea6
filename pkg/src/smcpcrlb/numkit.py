"""Dense symmetric-matrix kernels used by the Fisher information recursion.

All matrices here are small (a handful of states), so everything is plain
dense numpy.
"""
import numpy as np

from .errors import NotPositiveDefinite, SingularInformation, SingularInnerTerm

#: Largest admissible ratio between Cholesky diagonal entries.
MAX_CHOLESKY_RATIO = 1e12
#: Condition number above which a general solve is treated as singular.
MAX_CONDITION = 1e14


def as_square(m):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def symmetrize(m):
    return 0.5 * (m + m.T)


def is_symmetric(m, tol=1e-12):
    m = as_square(m)
    return bool(np.all(np.abs(m - m.T) <= tol * np.maximum(1.0, np.abs(m))))


def is_psd(m, tol=1e-9):
    """True when the smallest eigenvalue is >= -tol relative to the spectrum scale."""
    m = symmetrize(as_square(m))
    eig = np.linalg.eigvalsh(m)
    scale = max(1.0, float(np.max(np.abs(eig))))
    return bool(eig[0] >= -tol * scale)


def cholesky(m):
    """Lower Cholesky factor with the pivot and conditioning guards applied."""
    m = as_square(m)
    try:
        low = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed (non-positive pivot)") from exc
    diag = np.diag(low)
    if not np.all(np.isfinite(low)) or np.any(diag <= 0.0):
        raise NotPositiveDefinite("Cholesky factorization produced a non-positive pivot")
    if diag.max() / diag.min() > MAX_CHOLESKY_RATIO:
        raise NotPositiveDefinite(
            f"matrix too ill-conditioned: Cholesky diagonal ratio {diag.max() / diag.min():.3g}"
        )
    return low


def invert_spd(m):
    """Inverse of a symmetric positive definite matrix via its Cholesky factor."""
    low = cholesky(m)
    eye = np.eye(low.shape[0])
    low_inv = np.linalg.solve(low, eye)
    return symmetrize(low_inv.T @ low_inv)


def _checked_solve(a, b, exc_type, what):
    if not np.all(np.isfinite(a)) or np.linalg.cond(a) > MAX_CONDITION:
        raise exc_type(f"{what} is numerically singular")
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise exc_type(f"{what} is singular") from exc


def pfim_step(j_prev, d11, d12, d22):
    """One step of the information recursion ``J+ = D22 - D12' (J + D11)^-1 D12``."""
    j_prev, d11, d12, d22 = (as_square(a) for a in (j_prev, d11, d12, d22))
    x = _checked_solve(j_prev + d11, d12, SingularInformation, "J + D11")
    return symmetrize(d22 - d12.T @ x)


def pcrlb_inverse_step(j_prev, d11, d12, d22):
    """Bound ``J+^-1`` computed directly with the matrix inversion lemma.

    Uses ``D22^-1 - D22^-1 D12' [D12 D22^-1 D12' - (J + D11)]^-1 D12 D22^-1``;
    agrees with ``invert_spd(pfim_step(...))`` without ever forming ``J+``.
    """
    j_prev, d11, d12, d22 = (as_square(a) for a in (j_prev, d11, d12, d22))
    d22_inv = _checked_solve(d22, np.eye(d22.shape[0]), SingularInnerTerm, "D22")
    right = d12 @ d22_inv
    inner = d12 @ d22_inv @ d12.T - (j_prev + d11)
    x = _checked_solve(inner, right, SingularInnerTerm, "D12 D22^-1 D12' - (J + D11)")
    return symmetrize(d22_inv - d22_inv @ d12.T @ x)
