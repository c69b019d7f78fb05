"""Scatter-matrix estimators.

Sample covariance, CES maximum likelihood via the fixed-point iteration

    Sigma_{k+1} = (1/n) sum_i psi(x_i^H Sigma_k^-1 x_i) x_i x_i^H,

the Riemannian gradient of the negative log-likelihood under any
(alpha, beta) metric, and a generic Riemannian gradient descent which
recovers the fixed point for (alpha, beta) = (1, 0), first-order retraction
and constant step 1/n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, LeftCone, NotPositiveDefinite
from .geometry import (
    GAUSSIAN_PARAMS,
    MetricParams,
    metric_inner,
    retract_first_order,
    retract_second_order,
    riemannian_exp,
)
from .linalg import herm, validate_hpd
from .models import CesModel, SampleBatch, neg_log_likelihood, psi, quadratic_forms

FIRST_ORDER = "first_order"
SECOND_ORDER = "second_order"
EXPONENTIAL = "exponential"

_RETRACTIONS = {
    FIRST_ORDER: retract_first_order,
    SECOND_ORDER: retract_second_order,
    EXPONENTIAL: riemannian_exp,
}


@dataclass(frozen=True)
class StepRule:
    """Constant step or Armijo backtracking on the manifold."""

    kind: str = "constant"
    value: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4

    def __post_init__(self):
        if self.kind not in ("constant", "backtracking"):
            raise ValueError(f"unknown step rule {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise ValueError("constant step must be positive")
        if not (0 < self.shrink < 1 and 0 < self.sufficient_decrease < 1):
            raise ValueError("backtracking constants must lie in (0, 1)")


@dataclass(frozen=True)
class EstimationConfig:
    tolerance: float = 1e-9
    max_iterations: int = 1000
    retraction: str = SECOND_ORDER
    step_rule: StepRule = field(default_factory=StepRule)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.retraction not in _RETRACTIONS:
            raise ValueError(f"unknown retraction {self.retraction!r}")


@dataclass(frozen=True)
class EstimationResult:
    estimate: np.ndarray
    iterations: int
    residual_history: tuple[float, ...]
    converged: bool


def scm(batch: SampleBatch) -> np.ndarray:
    """Sample covariance (1/n) sum_i x_i x_i^H, validated HPD."""
    x = batch.samples
    return validate_hpd(x.T @ x.conj() / batch.count)


def _weighted_scatter(batch: SampleBatch, weights: np.ndarray) -> np.ndarray:
    x = batch.samples
    return herm((x.T * weights) @ x.conj() / batch.count)


def fixed_point_map(batch: SampleBatch, sigma, model: CesModel) -> np.ndarray:
    """One application of the MLE fixed-point operator T_psi."""
    q = quadratic_forms(batch, sigma)
    return _weighted_scatter(batch, psi(model, q))


def default_init(batch: SampleBatch) -> np.ndarray:
    """SCM warm start; identity scaled by mean sample energy when SCM is singular."""
    try:
        return scm(batch)
    except NotPositiveDefinite:
        energy = float(np.mean(np.abs(batch.samples) ** 2))
        return energy * np.eye(batch.dim)


def mle_fixed_point(
    batch: SampleBatch,
    model: CesModel,
    config: EstimationConfig = EstimationConfig(),
    sigma0: np.ndarray | None = None,
) -> EstimationResult:
    """Maximum-likelihood scatter via fixed-point iteration from the SCM.

    Stops when the relative Frobenius change between iterates falls below
    ``config.tolerance``.  Requires n > p.
    """
    if batch.count <= batch.dim:
        raise InsufficientSamples(f"need n > p, got n = {batch.count}, p = {batch.dim}")
    sigma = validate_hpd(sigma0) if sigma0 is not None else default_init(batch)
    history: list[float] = []
    converged = False
    for _ in range(config.max_iterations):
        nxt = fixed_point_map(batch, sigma, model)
        rel = float(np.linalg.norm(nxt - sigma) / np.linalg.norm(sigma))
        history.append(rel)
        sigma = nxt
        if rel < config.tolerance:
            converged = True
            break
    return EstimationResult(validate_hpd(sigma), len(history), tuple(history), converged)


def riemannian_grad_nll(
    sigma,
    batch: SampleBatch,
    model: CesModel,
    params: MetricParams = GAUSSIAN_PARAMS,
) -> np.ndarray:
    """Riemannian gradient of the negative log-likelihood at sigma.

    For (1, 0) this is n Sigma - sum_i psi(q_i) x_i x_i^H; the general case
    follows from the trace reweighting identity of the (alpha, beta) metric.
    """
    sigma = validate_hpd(sigma)
    params.check_dim(sigma.shape[0])
    q = quadratic_forms(batch, sigma)
    w = psi(model, q)
    n = batch.count
    base = n * sigma - n * _weighted_scatter(batch, w)  # grad at (1, 0)
    a, b = params.alpha, params.beta
    if b == 0.0 and a == 1.0:
        return base
    trace_term = float(n * sigma.shape[0] - np.sum(w * q))
    return herm(base / a - (b / (a * (a + sigma.shape[0] * b))) * trace_term * sigma)


def riemannian_gradient_descent(
    batch: SampleBatch,
    model: CesModel,
    params: MetricParams,
    config: EstimationConfig,
    sigma0,
) -> EstimationResult:
    """Gradient descent Sigma <- R(-lambda grad L) under the chosen metric.

    Stops when the metric norm of the gradient drops below
    ``config.tolerance``.  With backtracking, accepted steps satisfy an
    Armijo sufficient-decrease condition so the cost is non-increasing.
    """
    sigma = validate_hpd(sigma0)
    retract = _RETRACTIONS[config.retraction]
    rule = config.step_rule
    history: list[float] = []
    converged = False
    cost = neg_log_likelihood(batch, sigma, model) if rule.kind == "backtracking" else None
    for _ in range(config.max_iterations):
        grad = riemannian_grad_nll(sigma, batch, model, params)
        gnorm = float(np.sqrt(max(metric_inner(sigma, grad, grad, params), 0.0)))
        if gnorm < config.tolerance:
            converged = True
            break
        if rule.kind == "constant":
            try:
                sigma = retract(sigma, -rule.value * grad)
            except LeftCone as exc:
                raise LeftCone(
                    f"gradient step of size {rule.value} left the cone after "
                    f"{len(history)} iterations (gradient norm {gnorm:.3e})"
                ) from exc
        else:
            step = rule.value
            accepted = False
            while step > 1e-16:
                try:
                    candidate = retract(sigma, -step * grad)
                except LeftCone:
                    step *= rule.shrink
                    continue
                new_cost = neg_log_likelihood(batch, candidate, model)
                if new_cost <= cost - rule.sufficient_decrease * step * gnorm**2:
                    sigma, cost, accepted = candidate, new_cost, True
                    break
                step *= rule.shrink
            if not accepted:
                break  # line search stalled at machine precision
        history.append(gnorm)
    return EstimationResult(validate_hpd(sigma), len(history), tuple(history), converged)
