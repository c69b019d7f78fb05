"""Karcher means and the minimum-distance-to-mean (MDM) classifier.

The Karcher mean minimizes the Fisher-Rao variance over the HPD cone via the
fixed-step Riemannian gradient iteration

    Sigma_bar <- exp_{Sigma_bar}( (1/m) sum_j log_{Sigma_bar}(Sigma_j) ),

whose minimizer does not depend on the metric coefficients (alpha, beta).
A synthetic mixture generator stands in for real covariance datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CesGeoError, DimensionMismatch, EmptyClass
from .geometry import MetricParams, fisher_rao_distance_sq
from .icrb import EstimatorSpec, run_estimator
from .linalg import herm, spectral_map, validate_hpd
from .models import CesModel, sample_batch

NATURAL_PARAMS = MetricParams(1.0, 0.0)


def karcher_variance(sigma_bar, mats, params: MetricParams = NATURAL_PARAMS) -> float:
    """Half the mean squared geodesic distance from sigma_bar to the set."""
    sigma_bar = validate_hpd(sigma_bar)
    mats = [validate_hpd(M) for M in mats]
    if not mats:
        raise ValueError("empty set")
    for M in mats:
        if M.shape != sigma_bar.shape:
            raise DimensionMismatch(f"shape {M.shape} != {sigma_bar.shape}")
    return 0.5 * float(np.mean([fisher_rao_distance_sq(sigma_bar, M, params) for M in mats]))


@dataclass(frozen=True)
class KarcherResult:
    mean: np.ndarray
    iterations: int
    grad_norm: float
    converged: bool


def karcher_mean(mats, tol: float = 1e-9, max_iter: int = 200) -> KarcherResult:
    """Fisher-Rao center of mass of a set of HPD matrices.

    Initialized at the arithmetic mean; fixed step 1, halved when the
    variance increases.  Stops when the (1, 0)-metric gradient norm drops
    below ``tol``; at the iteration cap the best iterate is returned with
    ``converged = False``.
    """
    mats = [validate_hpd(M) for M in mats]
    if not mats:
        raise ValueError("empty set")
    p = mats[0].shape[0]
    for M in mats:
        if M.shape != (p, p):
            raise DimensionMismatch(f"shape {M.shape} != ({p}, {p})")
    if tol <= 0:
        raise ValueError("tol must be positive")
    stack = np.stack(mats)
    center = herm(np.mean(stack, axis=0))
    variance = karcher_variance(center, mats)
    grad_norm = np.inf
    for it in range(max_iter):
        s_half = spectral_map(center, "sqrt")
        s_ihalf = spectral_map(center, "inv_sqrt")
        white = np.einsum("ab,jbc,cd->jad", s_ihalf, stack, s_ihalf)
        logs = np.stack([spectral_map(herm(W), "log") for W in white])
        direction = np.mean(logs, axis=0)
        grad_norm = float(np.linalg.norm(direction))
        if grad_norm < tol:
            return KarcherResult(center, it, grad_norm, True)
        step = 1.0
        while True:
            candidate = herm(s_half @ spectral_map(step * direction, "exp") @ s_half)
            new_variance = karcher_variance(candidate, mats)
            if new_variance <= variance or step < 1e-8:
                center, variance = candidate, new_variance
                break
            step *= 0.5
    return KarcherResult(center, max_iter, grad_norm, False)


@dataclass(frozen=True)
class LabeledCovSet:
    """Covariance matrices with integer labels in [1, class_count]."""

    items: tuple[tuple[np.ndarray, int], ...]
    class_count: int

    def __post_init__(self):
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        if self.items:
            p = self.items[0][0].shape[0]
            for M, y in self.items:
                if M.shape != (p, p):
                    raise DimensionMismatch(f"shape {M.shape} != ({p}, {p})")
                if not 1 <= y <= self.class_count:
                    raise ValueError(f"label {y} outside [1, {self.class_count}]")

    def of_class(self, label: int) -> list[np.ndarray]:
        return [M for M, y in self.items if y == label]


@dataclass(frozen=True)
class ClassCenters:
    """Per-class Karcher means and the metric used for classification."""

    centers: tuple[np.ndarray, ...]  # index y - 1 holds class y
    params: MetricParams


def mdm_train(
    train: LabeledCovSet,
    params: MetricParams = NATURAL_PARAMS,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> ClassCenters:
    """One Karcher mean per class; raises EmptyClass for missing labels."""
    centers = []
    for y in range(1, train.class_count + 1):
        members = train.of_class(y)
        if not members:
            raise EmptyClass(f"class {y} has no training examples")
        centers.append(karcher_mean(members, tol=tol, max_iter=max_iter).mean)
    return ClassCenters(tuple(centers), params)


def mdm_predict(centers: ClassCenters, sigma_hat) -> int:
    """Label of the geodesically nearest class center; ties go to the lowest label."""
    sigma_hat = validate_hpd(sigma_hat)
    if sigma_hat.shape != centers.centers[0].shape:
        raise DimensionMismatch(
            f"query shape {sigma_hat.shape} != {centers.centers[0].shape}"
        )
    dists = [
        fisher_rao_distance_sq(C, sigma_hat, centers.params) for C in centers.centers
    ]
    return int(np.argmin(dists)) + 1


def evaluate_accuracy(centers: ClassCenters, test: LabeledCovSet) -> float:
    """Fraction of test items whose predicted label matches the true one."""
    if not test.items:
        raise ValueError("empty test set")
    hits = sum(mdm_predict(centers, M) == y for M, y in test.items)
    return hits / len(test.items)


@dataclass(frozen=True)
class MixtureScenario:
    """Synthetic class-separated covariance dataset description.

    One scatter matrix and CES model per class; each batch of ``n`` samples
    is summarized by the scenario's estimator before classification.
    """

    scatters: tuple[np.ndarray, ...]
    models: tuple[CesModel, ...]
    n: int
    train_batches: int
    test_batches: int
    estimator: EstimatorSpec

    def __post_init__(self):
        if not self.scatters:
            raise ValueError("at least one class is required")
        if len(self.models) != len(self.scatters):
            raise ValueError("one model per class is required")
        object.__setattr__(
            self, "scatters", tuple(validate_hpd(S) for S in self.scatters)
        )
        p = self.scatters[0].shape[0]
        for S in self.scatters:
            if S.shape != (p, p):
                raise DimensionMismatch("class scatters must share one dimension")
        if self.train_batches < 1 or self.test_batches < 1:
            raise ValueError("train_batches and test_batches must be >= 1")
        if self.n <= p:
            raise ValueError(f"n per batch must exceed p = {p}, got {self.n}")

    @property
    def class_count(self) -> int:
        return len(self.scatters)


@dataclass(frozen=True)
class MixtureData:
    train: LabeledCovSet
    test: LabeledCovSet
    failures: int


def synthetic_mixture(scenario: MixtureScenario, rng: np.random.Generator) -> MixtureData:
    """Draw per-class batches, estimate each batch's covariance, split by index.

    The first ``train_batches`` per class go to training, the rest to test.
    Batches whose estimation fails are dropped and counted.
    """
    train_items: list[tuple[np.ndarray, int]] = []
    test_items: list[tuple[np.ndarray, int]] = []
    failures = 0
    total = scenario.train_batches + scenario.test_batches
    for y in range(1, scenario.class_count + 1):
        sigma = scenario.scatters[y - 1]
        model = scenario.models[y - 1]
        for b in range(total):
            batch = sample_batch(sigma, model, scenario.n, rng)
            try:
                est = run_estimator(scenario.estimator, batch)
            except CesGeoError:
                failures += 1
                continue
            target = train_items if b < scenario.train_batches else test_items
            target.append((est, y))
    z = scenario.class_count
    return MixtureData(
        LabeledCovSet(tuple(train_items), z), LabeledCovSet(tuple(test_items), z), failures
    )
