import numpy as np
import pytest

from cesgeo.errors import InsufficientSamples
from cesgeo.estimation import (
    EstimationConfig,
    StepRule,
    fixed_point_map,
    mle_fixed_point,
    riemannian_grad_nll,
    riemannian_gradient_descent,
    scm,
)
from cesgeo.geometry import MetricParams, metric_inner, riemannian_exp
from cesgeo.models import (
    coefficients,
    gaussian,
    neg_log_likelihood,
    psi,
    quadratic_forms,
    sample_batch,
    stream_rng,
    student_t,
)

from util import random_hermitian, random_hpd, rng


def make_batch(p, n, model, seed, gen_seed=0):
    S = random_hpd(p, rng(gen_seed))
    return S, sample_batch(S, model, n, stream_rng(seed, 0))


def test_scm_matches_direct_sum():
    _, b = make_batch(3, 40, gaussian(3), 1)
    direct = sum(np.outer(x, x.conj()) for x in b.samples) / b.count
    assert np.allclose(scm(b), direct, atol=1e-12)


def test_scm_consistency():
    S, b = make_batch(3, 100_000, gaussian(3), 2)
    assert np.linalg.norm(scm(b) - S) / np.linalg.norm(S) < 0.02


def test_mle_requires_enough_samples():
    _, b = make_batch(4, 4, gaussian(4), 3)
    with pytest.raises(InsufficientSamples):
        mle_fixed_point(b, gaussian(4))


def test_gaussian_mle_equals_scm():
    # psi = 1 makes the fixed-point map constant at the SCM
    _, b = make_batch(3, 50, gaussian(3), 4)
    res = mle_fixed_point(b, gaussian(3))
    assert res.converged
    assert res.iterations == 1
    assert np.allclose(res.estimate, scm(b), atol=1e-14)


def test_t_mle_self_consistency():
    m = student_t(4, 3)
    _, b = make_batch(4, 200, m, 5)
    res = mle_fixed_point(b, m)
    assert res.converged
    nxt = fixed_point_map(b, res.estimate, m)
    assert np.linalg.norm(nxt - res.estimate) / np.linalg.norm(res.estimate) < 1e-8
    # residual history is one entry per iteration and decreasing overall
    assert len(res.residual_history) == res.iterations
    assert res.residual_history[-1] < res.residual_history[0]


def test_t_mle_unique_from_different_starts():
    m = student_t(3, 3)
    _, b = make_batch(3, 150, m, 6)
    a = mle_fixed_point(b, m).estimate
    c = mle_fixed_point(b, m, sigma0=np.eye(3)).estimate
    assert np.linalg.norm(a - c) / np.linalg.norm(a) < 1e-7


def test_mle_decreases_nll():
    m = student_t(4, 4)
    _, b = make_batch(4, 120, m, 7)
    start = scm(b)
    res = mle_fixed_point(b, m)
    assert neg_log_likelihood(b, res.estimate, m) <= neg_log_likelihood(b, start, m) + 1e-9


def test_grad_nll_closed_form_one_zero():
    m = student_t(3, 3)
    _, b = make_batch(3, 60, m, 8)
    S = random_hpd(3, rng(88))
    q = quadratic_forms(b, S)
    w = psi(m, q)
    direct = b.count * S - (b.samples.T * w) @ b.samples.conj()
    assert np.allclose(riemannian_grad_nll(S, b, m), direct, atol=1e-9)


@pytest.mark.parametrize("params", [MetricParams(1.0, 0.0), MetricParams(6.0 / 7.0, -1.0 / 7.0)])
def test_grad_nll_finite_difference(params):
    # metric pairing of the gradient = directional derivative of the NLL
    m = student_t(3, 3)
    _, b = make_batch(3, 80, m, 9)
    S = random_hpd(3, rng(99))
    grad = riemannian_grad_nll(S, b, m, params)
    gen = rng(100)
    eps = 1e-6
    for _ in range(10):
        xi = random_hermitian(3, gen)
        fd = (
            neg_log_likelihood(b, S + eps * xi, m)
            - neg_log_likelihood(b, S - eps * xi, m)
        ) / (2 * eps)
        assert metric_inner(S, grad, xi, params) == pytest.approx(fd, rel=1e-5)


def test_rgd_matches_fixed_point():
    # (1, 0) metric, first-order retraction, constant step 1/n
    m = student_t(4, 3)
    _, b = make_batch(4, 100, m, 10)
    cfg = EstimationConfig(
        tolerance=1e-300,
        max_iterations=5,
        retraction="first_order",
        step_rule=StepRule("constant", 1.0 / b.count),
    )
    start = scm(b)
    res = riemannian_gradient_descent(b, m, MetricParams(1.0, 0.0), cfg, start)
    direct = start
    for _ in range(5):
        direct = fixed_point_map(b, direct, m)
    assert np.linalg.norm(res.estimate - direct) < 1e-12 * np.linalg.norm(direct)


def test_rgd_zero_gradient_start():
    m = gaussian(3)
    _, b = make_batch(3, 60, m, 11)
    cfg = EstimationConfig(tolerance=1e-6, max_iterations=50)
    res = riemannian_gradient_descent(b, m, MetricParams(1.0, 0.0), cfg, scm(b))
    assert res.converged
    assert res.iterations == 0


def test_rgd_backtracking_converges_to_mle():
    m = student_t(3, 4)
    _, b = make_batch(3, 150, m, 12)
    cfg = EstimationConfig(
        tolerance=1e-6,
        max_iterations=500,
        retraction="second_order",
        step_rule=StepRule("backtracking", 1.0 / b.count),
    )
    res = riemannian_gradient_descent(b, m, MetricParams(1.0, 0.0), cfg, scm(b))
    ref = mle_fixed_point(b, m).estimate
    assert res.converged
    assert np.linalg.norm(res.estimate - ref) / np.linalg.norm(ref) < 1e-5


def test_config_validation():
    with pytest.raises(ValueError):
        EstimationConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        EstimationConfig(retraction="cayley")
    with pytest.raises(ValueError):
        StepRule("constant", -1.0)
    with pytest.raises(ValueError):
        StepRule("wolfe")
