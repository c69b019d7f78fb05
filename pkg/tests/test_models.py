import numpy as np
import pytest

from cesgeo.errors import DimensionMismatch
from cesgeo.geometry import metric_inner
from cesgeo.models import (
    CesModel,
    SampleBatch,
    coefficients,
    fim_inner_mc,
    gaussian,
    log_g,
    neg_log_likelihood,
    phi,
    phi_prime,
    psi,
    quadratic_forms,
    sample_batch,
    sample_second_order_modular,
    sample_uniform_sphere,
    stream_rng,
    student_t,
)

from util import random_hermitian, random_hpd, rng


def test_model_validation():
    with pytest.raises(ValueError):
        CesModel(0, "gaussian")
    with pytest.raises(ValueError):
        CesModel(3, "student_t")
    with pytest.raises(ValueError):
        CesModel(3, "cauchy")
    assert student_t(3, 2.5).dof == 2.5


def test_coefficients_values():
    c = coefficients(gaussian(7))
    assert c.alpha_g == 1.0 and c.beta_g == 0.0
    # d=3, p=10: alpha = 13/14
    c = coefficients(student_t(10, 3))
    assert c.alpha_g == pytest.approx(13.0 / 14.0, rel=1e-14)
    assert c.beta_g == pytest.approx(-1.0 / 14.0, rel=1e-14)
    # beta_g = alpha_g - 1 always
    for d in (0.5, 2.1, 100.0):
        c = coefficients(student_t(4, d))
        assert c.beta_g == pytest.approx(c.alpha_g - 1.0, rel=1e-14)
    # metric positivity: alpha_g + p beta_g = d / (d + p + 1) > 0
    c = coefficients(student_t(10, 3))
    assert c.alpha_g + 10 * c.beta_g == pytest.approx(3.0 / 14.0, rel=1e-12)


def test_generator_functions():
    g = gaussian(4)
    t = student_t(4, 3)
    q = np.array([0.0, 1.0, 5.0])
    assert np.allclose(psi(g, q), 1.0)
    assert np.allclose(phi(g, q), -1.0)
    assert np.allclose(phi_prime(g, q), 0.0)
    assert np.allclose(log_g(g, q), -q)
    assert np.allclose(psi(t, q), 7.0 / (3.0 + q))
    assert np.allclose(phi_prime(t, q), 7.0 / (3.0 + q) ** 2)
    assert np.allclose(log_g(t, q), -7.0 * np.log1p(q / 3.0))


def test_sample_batch_shapes_and_determinism():
    S = random_hpd(3, rng(0))
    m = student_t(3, 4)
    b1 = sample_batch(S, m, 50, stream_rng(9, 2))
    b2 = sample_batch(S, m, 50, stream_rng(9, 2))
    b3 = sample_batch(S, m, 50, stream_rng(9, 3))
    assert b1.samples.shape == (50, 3)
    assert np.array_equal(b1.samples, b2.samples)
    assert not np.array_equal(b1.samples, b3.samples)


def test_sphere_sampler_moments():
    gen = rng(1)
    u = sample_uniform_sphere(4, gen, size=200_000)
    assert np.allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)
    second = u.conj().T @ u / u.shape[0]
    assert np.linalg.norm(second - np.eye(4) / 4.0) < 5e-3


def test_modular_variate_moments():
    gen = rng(2)
    q = sample_second_order_modular(gaussian(4), gen, size=400_000)
    assert np.mean(q) == pytest.approx(4.0, rel=0.01)
    # Student-t: E[Q] = p d/(d-1)
    q = sample_second_order_modular(student_t(4, 5), gen, size=400_000)
    assert np.mean(q) == pytest.approx(5.0, rel=0.02)


def test_sample_covariance_scaling():
    # Gaussian: E[x x^H] = Sigma
    gen = rng(3)
    S = random_hpd(3, gen)
    b = sample_batch(S, gaussian(3), 200_000, stream_rng(3, 0))
    cov = b.samples.T @ b.samples.conj() / b.count
    assert np.linalg.norm(cov - S) / np.linalg.norm(S) < 0.02


def test_quadratic_forms_and_nll():
    S = np.diag([2.0, 0.5]).astype(complex)
    x = np.array([[1.0, 0.0], [0.0, 1.0 + 1.0j]])
    b = SampleBatch(x)
    q = quadratic_forms(b, S)
    assert np.allclose(q, [0.5, 4.0])
    nll = neg_log_likelihood(b, S, gaussian(2))
    assert nll == pytest.approx(2 * np.log(1.0) + 0.5 + 4.0, rel=1e-12)
    with pytest.raises(DimensionMismatch):
        quadratic_forms(b, np.eye(3))


def test_t_batch_quadratic_forms_match_modular():
    # with Sigma known the quadratic form recovers Q exactly
    S = random_hpd(4, rng(4))
    m = student_t(4, 3)
    q_fixed = 2.75
    b = sample_batch(S, m, 100, stream_rng(5, 0), modular_override=q_fixed)
    q = quadratic_forms(b, S)
    assert np.allclose(q, q_fixed, atol=1e-10)


def test_fim_inner_mc_matches_metric_inner():
    # the MC Fisher inner product agrees with the closed-form coefficients
    p = 3
    gen = rng(6)
    S = random_hpd(p, gen)
    xi = random_hermitian(p, gen)
    eta = random_hermitian(p, gen)
    m = student_t(p, 4)
    params = coefficients(m).to_metric_params()
    expected = metric_inner(S, xi, eta, params)
    est, se = fim_inner_mc(S, xi, eta, m, 200_000, stream_rng(6, 0))
    assert abs(est - expected) < 4.0 * se
    with pytest.raises(ValueError):
        fim_inner_mc(S, xi, eta, m, 100, stream_rng(6, 0))


def test_batch_validation():
    with pytest.raises(ValueError):
        SampleBatch(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        SampleBatch(np.array([[np.nan + 0j, 0.0]]))
