"""Intrinsic Cramér-Rao machinery.

Orthonormal tangent bases on the HPD cone, Fisher information matrices in
coordinates, closed-form bounds on the expected squared Euclidean, natural
(alpha, beta) = (1, 0) and Fisher-Rao (alpha_g, beta_g) distances, error
vectors, and a Monte-Carlo MSE-versus-bound experiment harness.

Curvature and bias corrections of the intrinsic bound are neglected; the
inequality used throughout is E[delta^2] >= tr(F^-1).
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    CesGeoError,
    DimensionMismatch,
    NumericalRankLoss,
    SingularFim,
)
from .estimation import EstimationConfig, mle_fixed_point, scm
from .geometry import (
    MetricParams,
    euclidean_distance_sq,
    fisher_rao_distance_sq,
    riemannian_log,
)
from .linalg import herm, spectral_map, validate_hpd
from .models import CesModel, coefficients, sample_batch, stream_rng

# Distance tags, also used as CSV row labels.
EUCLIDEAN = "euclidean"
NATURAL = "natural"
FISHER_RAO = "fisher_rao"

_COND_WARN = 1e12


@dataclass(frozen=True)
class TangentBasis:
    """Ordered basis of the p^2-dimensional tangent space at ``point``.

    ``params`` is the metric in which the basis is orthonormal; ``None``
    denotes the flat metric Re tr(xi eta).  Element order is fixed:
    p diagonal units, then p(p-1)/2 real symmetric pairs in lexicographic
    (i, j) order, then the matching imaginary antisymmetric-in-phase pairs.
    """

    point: np.ndarray
    params: MetricParams | None
    elements: np.ndarray  # (p*p, p, p) Hermitian

    @property
    def dim(self) -> int:
        return self.point.shape[0]


def euclidean_basis(p: int, point: np.ndarray | None = None) -> TangentBasis:
    """Canonical orthonormal basis of Hermitian matrices under Re tr(xi eta).

    Diagonal units e_i e_i^T, then (e_i e_j^T + e_j e_i^T)/sqrt(2), then
    i (e_i e_j^T - e_j e_i^T)/sqrt(2) for i < j.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    elements = np.zeros((p * p, p, p), dtype=complex)
    k = 0
    for i in range(p):
        elements[k, i, i] = 1.0
        k += 1
    r = 1.0 / np.sqrt(2.0)
    for i in range(p):
        for j in range(i + 1, p):
            elements[k, i, j] = r
            elements[k, j, i] = r
            k += 1
    for i in range(p):
        for j in range(i + 1, p):
            elements[k, i, j] = 1j * r
            elements[k, j, i] = -1j * r
            k += 1
    pt = np.eye(p, dtype=complex) if point is None else validate_hpd(point)
    return TangentBasis(pt, None, elements)


def natural_basis(sigma) -> TangentBasis:
    """Color the canonical basis: xi_q = Sigma^1/2 xi_q^E Sigma^1/2.

    Orthonormal under the (1, 0) affine-invariant metric at Sigma.
    """
    sigma = validate_hpd(sigma)
    p = sigma.shape[0]
    s_half = spectral_map(sigma, "sqrt")
    flat = euclidean_basis(p).elements
    colored = np.einsum("ab,qbc,cd->qad", s_half, flat, s_half)
    return TangentBasis(sigma, MetricParams(1.0, 0.0), colored)


def _gram(sigma, elements, params: MetricParams) -> np.ndarray:
    """Pairwise metric inner products of basis elements, vectorized."""
    a = np.linalg.solve(sigma, elements)  # (m, p, p) of Sigma^-1 xi_q
    traces = np.einsum("qii->q", a).real
    g = np.einsum("qij,lji->ql", a, a).real
    return params.alpha * g + params.beta * np.outer(traces, traces)


def gram_schmidt_basis(sigma, params: MetricParams) -> TangentBasis:
    """Orthonormalize the natural basis under an arbitrary (alpha, beta) metric.

    Modified Gram-Schmidt on the colored basis.  Raises NumericalRankLoss if
    a pivot norm drops below 1e-12 (cannot happen for valid params).
    """
    sigma = validate_hpd(sigma)
    params.check_dim(sigma.shape[0])
    elements = natural_basis(sigma).elements.copy()
    m = elements.shape[0]
    for q in range(m):
        g = _gram(sigma, elements[q : q + 1], params)[0, 0]
        norm = np.sqrt(max(g, 0.0))
        if norm < 1e-12:
            raise NumericalRankLoss(f"Gram-Schmidt pivot {q} has norm {norm:.3e}")
        elements[q] /= norm
        if q + 1 < m:
            # project the pivot out of the remaining vectors
            a_q = np.linalg.solve(sigma, elements[q])
            t_q = np.trace(a_q).real
            rest = np.linalg.solve(sigma, elements[q + 1 :])
            coeff = params.alpha * np.einsum("ij,lji->l", a_q, rest).real
            coeff += params.beta * t_q * np.einsum("lii->l", rest).real
            elements[q + 1 :] -= coeff[:, None, None] * elements[q]
    return TangentBasis(sigma, params, elements)


@dataclass(frozen=True)
class FimMatrix:
    """Fisher information in basis coordinates: F_ql = n <xi_q, xi_l>_FIM."""

    entries: np.ndarray
    sample_count: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def fim_matrix(sigma, basis: TangentBasis, model: CesModel, n: int) -> FimMatrix:
    """Assemble the n-sample Fisher information matrix in the given basis.

    Entries are n (alpha_g tr(S^-1 xi_q S^-1 xi_l)
                  + beta_g tr(S^-1 xi_q) tr(S^-1 xi_l)).
    """
    sigma = validate_hpd(sigma)
    if basis.point.shape != sigma.shape or not np.allclose(basis.point, sigma):
        raise DimensionMismatch("basis is anchored at a different point")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    c = coefficients(model)
    g = _gram(sigma, basis.elements, c.to_metric_params())
    return FimMatrix(n * 0.5 * (g + g.T), n)


@dataclass(frozen=True)
class BoundReport:
    """Closed-form lower bound on an expected squared distance."""

    distance_tag: str
    bound_value: float
    p: int
    n: int
    alpha_g: float
    beta_g: float


def crb_euclidean(sigma, model: CesModel, n: int) -> BoundReport:
    """Bound on E||Sigma_hat - Sigma||_F^2: trace of the inverse FIM in the flat basis."""
    sigma = validate_hpd(sigma)
    p = sigma.shape[0]
    fim = fim_matrix(sigma, euclidean_basis(p, sigma), model, n)
    cond = np.linalg.cond(fim.entries)
    if not np.isfinite(cond):
        raise SingularFim(f"Fisher information matrix is singular (cond = {cond})")
    if cond > _COND_WARN:
        warnings.warn(
            f"Fisher information condition number {cond:.3e} exceeds {_COND_WARN:.0e}; "
            "the Euclidean bound may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    try:
        inv = np.linalg.inv(fim.entries)
    except np.linalg.LinAlgError as exc:
        raise SingularFim(f"Fisher information inversion failed (cond = {cond:.3e})") from exc
    c = coefficients(model)
    return BoundReport(EUCLIDEAN, float(np.trace(inv)), p, n, c.alpha_g, c.beta_g)


def crb_natural(model: CesModel, n: int, p: int) -> BoundReport:
    """Bound on the squared (1, 0) distance: (1/n)((p^2 - 1)/alpha_g + 1/(alpha_g + p beta_g)).

    Independent of Sigma; reduces to p^2/n for Gaussian coefficients.
    """
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n = {n}, p = {p}")
    c = coefficients(model)
    c.to_metric_params().check_dim(p)  # guards model-dim / p mismatches
    value = ((p**2 - 1) / c.alpha_g + 1.0 / (c.alpha_g + p * c.beta_g)) / n
    return BoundReport(NATURAL, value, p, n, c.alpha_g, c.beta_g)


def crb_fisher_rao(p: int, n: int) -> BoundReport:
    """Bound on the squared (alpha_g, beta_g) distance: p^2/n, model-independent."""
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n = {n}, p = {p}")
    return BoundReport(FISHER_RAO, p**2 / n, p, n, 1.0, 0.0)


def error_vector(sigma, sigma_hat, basis: TangentBasis) -> np.ndarray:
    """Coordinates of the estimation error in the basis.

    eps_q = <log_Sigma(Sigma_hat), xi_q> in the basis metric; for the flat
    basis the logarithm degenerates to Sigma_hat - Sigma.  The squared norm
    of the result equals the corresponding squared distance.
    """
    sigma = validate_hpd(sigma)
    sigma_hat = validate_hpd(sigma_hat)
    if sigma.shape != sigma_hat.shape or sigma.shape != basis.point.shape:
        raise DimensionMismatch("sigma, sigma_hat and basis dimensions disagree")
    if basis.params is None:
        delta = sigma_hat - sigma
        return np.einsum("qij,ji->q", basis.elements, delta).real
    xi = riemannian_log(sigma, sigma_hat)
    a = np.linalg.solve(sigma, basis.elements)
    b = np.linalg.solve(sigma, xi)
    out = basis.params.alpha * np.einsum("qij,ji->q", a, b).real
    out += basis.params.beta * np.einsum("qii->q", a).real * np.trace(b).real
    return out


# --- Monte-Carlo MSE experiment ---------------------------------------------

SCM = "scm"
MLE = "mle"


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator entry of the experiment: tag, kind, and (for MLE) its model."""

    tag: str
    kind: str
    model: CesModel | None = None

    def __post_init__(self):
        if self.kind not in (SCM, MLE):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.kind == MLE and self.model is None:
            raise ValueError("MLE estimator requires a model")


@dataclass(frozen=True)
class McScenario:
    """Monte-Carlo experiment description."""

    sigma: np.ndarray
    model_true: CesModel
    estimators: tuple[EstimatorSpec, ...]
    n_grid: tuple[int, ...]
    trials: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "sigma", validate_hpd(self.sigma))
        p = self.sigma.shape[0]
        if any(n <= p for n in self.n_grid):
            raise ValueError(f"every n must exceed p = {p}, got {self.n_grid}")
        if self.trials < 50:
            raise ValueError(f"trials must be >= 50, got {self.trials}")
        if not self.estimators:
            raise ValueError("at least one estimator is required")


@dataclass(frozen=True)
class McMseRow:
    estimator: str
    n: int
    distance: str
    mean_sq_dist: float
    std_err: float
    bound: float
    trials: int
    failures: int


def run_estimator(spec: EstimatorSpec, batch):
    if spec.kind == SCM:
        return scm(batch)
    return mle_fixed_point(batch, spec.model, EstimationConfig()).estimate


def _mse_trial(args) -> list[tuple[str, int, tuple[float, float, float] | None]]:
    """One trial: shared batch per n, every estimator, three squared distances.

    Top level so ProcessPoolExecutor can pickle it.  Returns None distances
    for estimator failures.
    """
    scenario, trial = args
    rng = stream_rng(scenario.seed, trial)
    params_g = coefficients(scenario.model_true).to_metric_params()
    natural_params = MetricParams(1.0, 0.0)
    out = []
    for n in scenario.n_grid:
        batch = sample_batch(scenario.sigma, scenario.model_true, n, rng)
        for spec in scenario.estimators:
            try:
                est = run_estimator(spec, batch)
                dists = (
                    euclidean_distance_sq(scenario.sigma, est),
                    fisher_rao_distance_sq(scenario.sigma, est, natural_params),
                    fisher_rao_distance_sq(scenario.sigma, est, params_g),
                )
            except CesGeoError:
                dists = None
            out.append((spec.tag, n, dists))
    return out


def mc_mse_experiment(scenario: McScenario, workers: int = 1) -> list[McMseRow]:
    """Mean squared distances versus sample size, with the matching bounds.

    One batch per (trial, n) is shared across estimators.  Trials run on
    per-trial RNG streams and are reduced in trial order, so the output is
    bitwise identical for any worker count.
    """
    args = [(scenario, t) for t in range(scenario.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_mse_trial, args, chunksize=8))
    else:
        per_trial = [_mse_trial(a) for a in args]

    samples: dict[tuple[str, int], list[tuple[float, float, float]]] = {}
    failures: dict[tuple[str, int], int] = {}
    for spec in scenario.estimators:
        for n in scenario.n_grid:
            samples[(spec.tag, n)] = []
            failures[(spec.tag, n)] = 0
    for trial_rows in per_trial:
        for tag, n, dists in trial_rows:
            if dists is None:
                failures[(tag, n)] += 1
            else:
                samples[(tag, n)].append(dists)

    p = scenario.sigma.shape[0]
    rows: list[McMseRow] = []
    for spec in scenario.estimators:
        for n in scenario.n_grid:
            bounds = (
                crb_euclidean(scenario.sigma, scenario.model_true, n).bound_value,
                crb_natural(scenario.model_true, n, p).bound_value,
                crb_fisher_rao(p, n).bound_value,
            )
            cell = np.asarray(samples[(spec.tag, n)], dtype=float)
            for k, tag in enumerate((EUCLIDEAN, NATURAL, FISHER_RAO)):
                if cell.size:
                    mean = float(np.mean(cell[:, k]))
                    se = (
                        float(np.std(cell[:, k], ddof=1) / np.sqrt(cell.shape[0]))
                        if cell.shape[0] > 1
                        else 0.0
                    )
                else:
                    mean, se = float("nan"), float("nan")
                rows.append(
                    McMseRow(
                        estimator=spec.tag,
                        n=n,
                        distance=tag,
                        mean_sq_dist=mean,
                        std_err=se,
                        bound=bounds[k],
                        trials=cell.shape[0],
                        failures=failures[(spec.tag, n)],
                    )
                )
    return rows
