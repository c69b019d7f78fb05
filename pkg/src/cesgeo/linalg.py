"""Dense complex Hermitian linear algebra primitives.

Everything downstream (geometry, estimation, bounds, classification) is built
on validated Hermitian positive definite (HPD) arrays and spectral matrix
functions computed through a single eigendecomposition primitive.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    NotHermitian,
    NotPositiveDefinite,
)

# Inputs with relative asymmetry above this are rejected; below it they are
# silently symmetrized (round-off accumulates in iterative algorithms).
HERMITIAN_REL_TOL = 1e-8

# Default relative eigenvalue floor for positive definiteness, matching
# double-precision eigenvalue accuracy.
HPD_REL_TOL = 1e-12


def as_square_complex(M) -> np.ndarray:
    """Coerce to a finite square complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(float))):
        raise ValueError("matrix contains NaN or Inf entries")
    return A


def herm(M: np.ndarray) -> np.ndarray:
    """Hermitian part (M + M^H) / 2."""
    return 0.5 * (M + M.conj().T)


def check_hermitian(M, rel_tol: float = HERMITIAN_REL_TOL) -> np.ndarray:
    """Validate Hermitian symmetry and return the explicitly symmetrized matrix.

    Raises
    ------
    NotHermitian
        If ||M - M^H||_F / ||M||_F exceeds ``rel_tol``.
    """
    A = as_square_complex(M)
    scale = np.linalg.norm(A)
    if scale > 0.0:
        asym = np.linalg.norm(A - A.conj().T) / scale
        if asym > rel_tol:
            raise NotHermitian(f"relative asymmetry {asym:.3e} exceeds {rel_tol:.1e}")
    return herm(A)


def validate_hpd(M, rel_tol: float = HPD_REL_TOL) -> np.ndarray:
    """Certify positive definiteness and return the symmetrized matrix.

    The test is relative: lambda_min > rel_tol * lambda_max.  Near-boundary
    matrices are rejected rather than regularized, since the affine-invariant
    geometry treats the cone boundary as infinitely far.
    """
    A = check_hermitian(M)
    w = np.linalg.eigvalsh(A)
    if w[0] <= rel_tol * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise NotPositiveDefinite(
            f"eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}] fails lambda_min > "
            f"{rel_tol:.1e} * lambda_max"
        )
    return A


def eig_hermitian(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : (p,) ndarray
        Real eigenvalues in non-decreasing order.
    U : (p, p) ndarray
        Unitary eigenvector matrix, M = U diag(w) U^H.
    """
    A = check_hermitian(M)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return w, U


_SPECTRAL_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
    "inv": lambda w: 1.0 / w,
}

# log-family maps require strictly positive spectra
_NEEDS_POSITIVE = {"log", "sqrt", "inv_sqrt", "inv", "pow"}


def spectral_map(M, fn: str, t: float | None = None) -> np.ndarray:
    """Apply a scalar function to the spectrum: U f(Lambda) U^H, re-symmetrized.

    Parameters
    ----------
    fn : {"exp", "log", "sqrt", "inv_sqrt", "inv", "pow"}
        For ``"pow"`` the exponent ``t`` is required and the map is
        exp(t log(.)).
    """
    if fn == "pow":
        if t is None:
            raise ValueError("spectral_map('pow') requires the exponent t")
    elif fn not in _SPECTRAL_FUNCS:
        raise ValueError(f"unknown spectral function {fn!r}")
    w, U = eig_hermitian(M)
    if fn in _NEEDS_POSITIVE and w[0] <= 0.0:
        raise DomainError(f"{fn} requires a positive definite input (lambda_min={w[0]:.3e})")
    fw = np.power(w, t) if fn == "pow" else _SPECTRAL_FUNCS[fn](w)
    return herm((U * fw) @ U.conj().T)


def toeplitz_scatter(p: int, rho: complex) -> np.ndarray:
    """Hermitian Toeplitz scatter with entries rho^(j-i) above the diagonal.

    Raises NotPositiveDefinite when |rho| is too close to 1 at the given p.
    """
    if abs(rho) >= 1.0:
        raise ValueError(f"|rho| = {abs(rho):.3f} must be < 1")
    powers = rho ** np.arange(p)
    T = np.zeros((p, p), dtype=complex)
    for k in range(p):
        for j in range(k, p):
            T[k, j] = powers[j - k]
            T[j, k] = np.conj(powers[j - k])
    return validate_hpd(T)
