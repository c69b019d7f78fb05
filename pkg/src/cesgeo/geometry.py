"""The (alpha, beta) affine-invariant metric family on the HPD cone.

Geodesics, exponential/logarithm maps, distances and retractions.  The metric

    <xi, eta>_Sigma = Re( alpha tr(S^-1 xi S^-1 eta)
                          + beta tr(S^-1 xi) tr(S^-1 eta) )

is positive definite whenever alpha > 0 and beta > -alpha/p.  Geodesics and
the exp/log maps do not depend on (alpha, beta); distances do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidMetricParams, LeftCone, NotPositiveDefinite
from .linalg import check_hermitian, eig_hermitian, herm, spectral_map, validate_hpd


@dataclass(frozen=True)
class MetricParams:
    """Coefficients (alpha, beta) of the affine-invariant metric family."""

    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise InvalidMetricParams(f"alpha must be positive, got {self.alpha}")

    def check_dim(self, p: int) -> None:
        """Positive definiteness of the metric requires beta > -alpha/p."""
        if not self.beta > -self.alpha / p:
            raise InvalidMetricParams(
                f"beta = {self.beta} violates beta > -alpha/p = {-self.alpha / p} at p = {p}"
            )


GAUSSIAN_PARAMS = MetricParams(1.0, 0.0)


def _check_same_dim(*mats: np.ndarray) -> int:
    p = mats[0].shape[0]
    for M in mats[1:]:
        if M.shape != (p, p):
            raise DimensionMismatch(f"shape {M.shape} incompatible with ({p}, {p})")
    return p


def metric_inner(sigma, xi, eta, params: MetricParams = GAUSSIAN_PARAMS) -> float:
    """Affine-invariant inner product of tangent vectors xi, eta at sigma."""
    sigma = np.asarray(sigma, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    p = _check_same_dim(sigma, xi, eta)
    params.check_dim(p)
    a = np.linalg.solve(sigma, xi)
    b = np.linalg.solve(sigma, eta)
    value = params.alpha * np.trace(a @ b) + params.beta * np.trace(a) * np.trace(b)
    return float(value.real)


def euclidean_inner(xi, eta) -> float:
    """Flat metric Re tr(xi eta) on Hermitian matrices."""
    xi = np.asarray(xi, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    _check_same_dim(xi, eta)
    return float(np.trace(xi @ eta).real)


def geodesic_from_direction(sigma, xi, t: float) -> np.ndarray:
    """Geodesic through sigma with initial velocity xi, evaluated at t.

    Uses the symmetric form S^1/2 exp(t S^-1/2 xi S^-1/2) S^1/2 so that all
    intermediates stay Hermitian.
    """
    sigma = validate_hpd(sigma)
    xi = check_hermitian(xi)
    _check_same_dim(sigma, xi)
    s_half = spectral_map(sigma, "sqrt")
    s_ihalf = spectral_map(sigma, "inv_sqrt")
    inner = spectral_map(t * herm(s_ihalf @ xi @ s_ihalf), "exp")
    return herm(s_half @ inner @ s_half)


def geodesic_between(sigma1, sigma2, t: float) -> np.ndarray:
    """Geodesic joining sigma1 (t=0) to sigma2 (t=1), evaluated at t."""
    sigma1 = validate_hpd(sigma1)
    sigma2 = validate_hpd(sigma2)
    _check_same_dim(sigma1, sigma2)
    s_half = spectral_map(sigma1, "sqrt")
    s_ihalf = spectral_map(sigma1, "inv_sqrt")
    middle = spectral_map(herm(s_ihalf @ sigma2 @ s_ihalf), "pow", t=t)
    return herm(s_half @ middle @ s_half)


def riemannian_exp(sigma, xi) -> np.ndarray:
    """Riemannian exponential map: the geodesic from (sigma, xi) at t = 1."""
    return geodesic_from_direction(sigma, xi, 1.0)


def riemannian_log(sigma, sigma_hat) -> np.ndarray:
    """Inverse of the Riemannian exponential: S^1/2 log(S^-1/2 Shat S^-1/2) S^1/2."""
    sigma = validate_hpd(sigma)
    sigma_hat = validate_hpd(sigma_hat)
    _check_same_dim(sigma, sigma_hat)
    s_half = spectral_map(sigma, "sqrt")
    s_ihalf = spectral_map(sigma, "inv_sqrt")
    middle = spectral_map(herm(s_ihalf @ sigma_hat @ s_ihalf), "log")
    return herm(s_half @ middle @ s_half)


def fisher_rao_distance_sq(sigma1, sigma2, params: MetricParams = GAUSSIAN_PARAMS) -> float:
    """Squared geodesic distance alpha ||log(S1^-1 S2)||_F^2 + beta (logdet S1^-1 S2)^2."""
    sigma1 = validate_hpd(sigma1)
    sigma2 = validate_hpd(sigma2)
    p = _check_same_dim(sigma1, sigma2)
    params.check_dim(p)
    s_ihalf = spectral_map(sigma1, "inv_sqrt")
    w, _ = eig_hermitian(herm(s_ihalf @ sigma2 @ s_ihalf))
    log_w = np.log(w)
    return float(params.alpha * np.sum(log_w**2) + params.beta * np.sum(log_w) ** 2)


def euclidean_distance_sq(sigma1, sigma2) -> float:
    """Squared Frobenius norm of the difference."""
    sigma1 = np.asarray(sigma1, dtype=complex)
    sigma2 = np.asarray(sigma2, dtype=complex)
    _check_same_dim(sigma1, sigma2)
    return float(np.linalg.norm(sigma1 - sigma2) ** 2)


def retract_first_order(sigma, xi) -> np.ndarray:
    """First-order retraction sigma + xi.

    Can leave the cone; in that case LeftCone is raised.
    """
    sigma = validate_hpd(sigma)
    xi = check_hermitian(xi)
    _check_same_dim(sigma, xi)
    try:
        return validate_hpd(sigma + xi)
    except NotPositiveDefinite as exc:
        raise LeftCone(f"first-order retraction left the HPD cone: {exc}") from exc


def retract_second_order(sigma, xi) -> np.ndarray:
    """Second-order retraction sigma + xi + xi sigma^-1 xi / 2.

    Always lands inside the cone: the induced eigenvalue map is
    1 + lambda + lambda^2/2 > 0.
    """
    sigma = validate_hpd(sigma)
    xi = check_hermitian(xi)
    _check_same_dim(sigma, xi)
    return herm(sigma + xi + 0.5 * (xi @ np.linalg.solve(sigma, xi)))


def connection_residual(sigma, xi, t: float, h: float) -> float:
    """Finite-difference acceleration residual ||gamma'' - gamma' gamma^-1 gamma'||_F.

    Diagnostic for the zero-acceleration property of geodesics; must vanish
    at quadratic rate as h -> 0.
    """
    if not 0.0 < h <= 1e-2:
        raise ValueError(f"h must lie in (0, 1e-2], got {h}")
    xi = check_hermitian(xi)
    if np.linalg.norm(xi) == 0.0:
        return 0.0
    g0 = geodesic_from_direction(sigma, xi, t)
    gp = geodesic_from_direction(sigma, xi, t + h)
    gm = geodesic_from_direction(sigma, xi, t - h)
    accel = (gp - 2.0 * g0 + gm) / h**2
    vel = (gp - gm) / (2.0 * h)
    residual = accel - vel @ np.linalg.solve(g0, vel)
    return float(np.linalg.norm(residual))
