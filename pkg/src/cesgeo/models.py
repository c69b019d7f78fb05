"""Complex elliptically symmetric (CES) distribution descriptors and samplers.

A centered CES vector admits the stochastic representation

    x  =_d  sqrt(Q) Sigma^1/2 u,

with u uniform on the complex unit sphere and Q a nonnegative scalar (the
second-order modular variate) whose law is set by the density generator g.
Implemented generators: Gaussian g(t) = exp(-t) and Student-t
g_d(t) = (1 + t/d)^-(d+p).

The complex chi-square with k degrees of freedom is sampled as Gamma(k, 1),
fixing the convention E[||z||^2] = k for a standard complex normal z.  The
Student-t modular variate keeps the raw (unnormalized) representation
Q = Gamma(p, 1) / (Gamma(d, 1) / d), so E[x x^H] = (E[Q]/p) Sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .geometry import MetricParams
from .linalg import spectral_map, validate_hpd

GAUSSIAN = "gaussian"
STUDENT_T = "student_t"


@dataclass(frozen=True)
class CesModel:
    """Distribution descriptor: dimension and density generator."""

    dim: int
    kind: str
    dof: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.kind == STUDENT_T:
            if self.dof is None or not self.dof > 0:
                raise ValueError(f"Student-t requires dof > 0, got {self.dof}")
        elif self.kind != GAUSSIAN:
            raise ValueError(f"unknown generator kind {self.kind!r}")


def gaussian(p: int) -> CesModel:
    return CesModel(p, GAUSSIAN)


def student_t(p: int, dof: float) -> CesModel:
    return CesModel(p, STUDENT_T, dof)


@dataclass(frozen=True)
class CesCoefficients:
    """Fisher metric coefficients (alpha_g, beta_g) with beta_g = alpha_g - 1."""

    alpha_g: float
    beta_g: float

    def to_metric_params(self) -> MetricParams:
        return MetricParams(self.alpha_g, self.beta_g)


def coefficients(model: CesModel) -> CesCoefficients:
    """Metric coefficients of the model's Fisher information.

    Gaussian: (1, 0).  Student-t with d degrees of freedom:
    alpha_g = (d + p) / (d + p + 1), beta_g = alpha_g - 1.
    """
    if model.kind == GAUSSIAN:
        return CesCoefficients(1.0, 0.0)
    s = model.dof + model.dim
    return CesCoefficients(s / (s + 1.0), -1.0 / (s + 1.0))


def psi(model: CesModel, t):
    """psi(t) = -g'(t)/g(t).  Gaussian: 1; Student-t: (d+p)/(d+t)."""
    t = np.asarray(t, dtype=float)
    if model.kind == GAUSSIAN:
        return np.ones_like(t)
    return (model.dof + model.dim) / (model.dof + t)


def phi(model: CesModel, t):
    """phi(t) = g'(t)/g(t) = -psi(t)."""
    return -psi(model, t)


def phi_prime(model: CesModel, t):
    """Analytic derivative of phi.  Gaussian: 0; Student-t: (d+p)/(d+t)^2."""
    t = np.asarray(t, dtype=float)
    if model.kind == GAUSSIAN:
        return np.zeros_like(t)
    return (model.dof + model.dim) / (model.dof + t) ** 2


def log_g(model: CesModel, t):
    """log of the density generator, up to the normalization constant."""
    t = np.asarray(t, dtype=float)
    if model.kind == GAUSSIAN:
        return -t
    return -(model.dof + model.dim) * np.log1p(t / model.dof)


@dataclass(frozen=True)
class SampleBatch:
    """n i.i.d. complex p-vectors from one CES law, stored as an (n, p) array."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError(f"expected an (n, p) array with n >= 1, got shape {s.shape}")
        if not np.all(np.isfinite(s.view(float))):
            raise ValueError("batch contains non-finite samples")
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based PRNG stream; identical (seed, stream) reproduce bit-for-bit."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def quadratic_forms(batch: SampleBatch, sigma: np.ndarray) -> np.ndarray:
    """q_i = x_i^H Sigma^-1 x_i for every sample, as a real vector."""
    if batch.dim != sigma.shape[0]:
        raise DimensionMismatch(f"batch dim {batch.dim} != sigma dim {sigma.shape[0]}")
    y = np.linalg.solve(sigma, batch.samples.T)
    return np.einsum("ip,pi->i", batch.samples.conj(), y).real


def neg_log_likelihood(batch: SampleBatch, sigma, model: CesModel) -> float:
    """n log det Sigma - sum_i log g(x_i^H Sigma^-1 x_i), constant dropped."""
    sigma = validate_hpd(sigma)
    q = quadratic_forms(batch, sigma)
    _, logdet = np.linalg.slogdet(sigma)
    return float(batch.count * logdet - np.sum(log_g(model, q)))


def sample_uniform_sphere(p: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """(size, p) draws uniform on the complex unit sphere."""
    z = rng.standard_normal((size, p)) + 1j * rng.standard_normal((size, p))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_second_order_modular(
    model: CesModel, rng: np.random.Generator, size: int = 1
) -> np.ndarray:
    """Draws of Q: Gamma(p, 1) for Gaussian, Gamma(p,1)/(Gamma(d,1)/d) for Student-t."""
    num = rng.gamma(model.dim, size=size)
    if model.kind == GAUSSIAN:
        return num
    return num / (rng.gamma(model.dof, size=size) / model.dof)


def sample_batch(
    sigma,
    model: CesModel,
    n: int,
    rng: np.random.Generator,
    modular_override: float | None = None,
) -> SampleBatch:
    """n i.i.d. draws of sqrt(Q) Sigma^1/2 u.

    ``modular_override`` pins Q to a constant (degenerate test hook).
    Draw order is fixed (Q first, then u) so batches are reproducible.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sigma = validate_hpd(sigma)
    if sigma.shape[0] != model.dim:
        raise DimensionMismatch(f"sigma dim {sigma.shape[0]} != model dim {model.dim}")
    if modular_override is not None:
        q = np.full(n, float(modular_override))
    else:
        q = sample_second_order_modular(model, rng, size=n)
    u = sample_uniform_sphere(model.dim, rng, size=n)
    s_half = spectral_map(sigma, "sqrt")
    x = np.sqrt(q)[:, None] * (u @ s_half.T)
    return SampleBatch(x)


def fim_inner_mc(
    sigma,
    xi,
    eta,
    model: CesModel,
    n_draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the single-sample Fisher inner product.

    Estimates E[ D log-lik(x|Sigma)[xi] * D log-lik(x|Sigma)[eta] ] over
    ``n_draws`` samples, returning (estimate, standard error).  Used as an
    independent oracle for ``geometry.metric_inner`` with (alpha_g, beta_g).
    """
    if n_draws < 10_000:
        raise ValueError(f"n_draws must be >= 1e4, got {n_draws}")
    sigma = validate_hpd(sigma)
    batch = sample_batch(sigma, model, n_draws, rng)
    y = np.linalg.solve(sigma, batch.samples.T)  # (p, n)
    q = np.einsum("ip,pi->i", batch.samples.conj(), y).real
    phi_q = phi(model, q)
    sigma_inv = spectral_map(sigma, "inv")

    def directional(v):
        a = sigma_inv @ v  # Sigma^-1 v
        # tr(S^-1 v S^-1 x x^H) = x^H S^-1 v S^-1 x = y^H v y
        quad = np.einsum("pi,pq,qi->i", y.conj(), v, y).real
        return -np.trace(a).real - phi_q * quad

    products = directional(np.asarray(xi, dtype=complex)) * directional(
        np.asarray(eta, dtype=complex)
    )
    estimate = float(np.mean(products))
    std_error = float(np.std(products, ddof=1) / np.sqrt(n_draws))
    return estimate, std_error
