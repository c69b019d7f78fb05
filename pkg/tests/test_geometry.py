import numpy as np
import pytest

from cesgeo.errors import InvalidMetricParams, LeftCone
from cesgeo.geometry import (
    MetricParams,
    connection_residual,
    euclidean_distance_sq,
    euclidean_inner,
    fisher_rao_distance_sq,
    geodesic_between,
    geodesic_from_direction,
    metric_inner,
    retract_first_order,
    retract_second_order,
    riemannian_exp,
    riemannian_log,
)
from cesgeo.linalg import spectral_map

from util import random_hermitian, random_hpd, rng


def random_unitary(p, gen):
    A = gen.standard_normal((p, p)) + 1j * gen.standard_normal((p, p))
    Q, _ = np.linalg.qr(A)
    return Q


def test_metric_params_validation():
    with pytest.raises(InvalidMetricParams):
        MetricParams(-1.0, 0.0)
    with pytest.raises(InvalidMetricParams):
        MetricParams(1.0, -0.5).check_dim(2)
    MetricParams(1.0, -0.4).check_dim(2)


def test_metric_inner_identity_point():
    # at Sigma = I the metric is alpha Re tr(xi eta) + beta tr(xi) tr(eta)
    gen = rng(10)
    xi = random_hermitian(3, gen)
    eta = random_hermitian(3, gen)
    params = MetricParams(2.0, 0.5)
    expected = 2.0 * np.trace(xi @ eta).real + 0.5 * np.trace(xi).real * np.trace(eta).real
    assert metric_inner(np.eye(3), xi, eta, params) == pytest.approx(expected, rel=1e-12)


def test_metric_inner_symmetric_and_positive():
    gen = rng(11)
    S = random_hpd(4, gen)
    params = MetricParams(1.5, -0.2)
    for _ in range(20):
        xi = random_hermitian(4, gen)
        eta = random_hermitian(4, gen)
        assert metric_inner(S, xi, eta, params) == pytest.approx(
            metric_inner(S, eta, xi, params), rel=1e-10
        )
        assert metric_inner(S, xi, xi, params) > 0


def test_metric_congruence_invariance():
    gen = rng(12)
    S = random_hpd(4, gen)
    xi = random_hermitian(4, gen)
    eta = random_hermitian(4, gen)
    A = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    params = MetricParams(1.0, 0.3)
    before = metric_inner(S, xi, eta, params)
    after = metric_inner(
        A @ S @ A.conj().T, A @ xi @ A.conj().T, A @ eta @ A.conj().T, params
    )
    assert after == pytest.approx(before, rel=1e-9)


def test_euclidean_inner_matches_trace():
    gen = rng(13)
    xi = random_hermitian(3, gen)
    assert euclidean_inner(xi, xi) == pytest.approx(np.linalg.norm(xi) ** 2, rel=1e-12)


def test_geodesic_endpoints_and_between():
    gen = rng(14)
    S1 = random_hpd(4, gen)
    S2 = random_hpd(4, gen)
    assert np.allclose(geodesic_between(S1, S2, 0.0), S1, atol=1e-10)
    assert np.allclose(geodesic_between(S1, S2, 1.0), S2, atol=1e-9)
    # scalar case: geometric interpolation
    a, b = 2.0, 8.0
    mid = geodesic_between(np.array([[a]]), np.array([[b]]), 0.5)
    assert mid[0, 0].real == pytest.approx(4.0, rel=1e-12)


def test_exp_log_inverse_pair():
    gen = rng(15)
    S = random_hpd(5, gen)
    xi = random_hermitian(5, gen)
    back = riemannian_log(S, riemannian_exp(S, xi))
    assert np.allclose(back, xi, atol=1e-8)
    S2 = random_hpd(5, gen)
    assert np.allclose(riemannian_exp(S, riemannian_log(S, S2)), S2, atol=1e-8)


def test_geodesic_from_direction_matches_between():
    gen = rng(16)
    S1 = random_hpd(4, gen)
    S2 = random_hpd(4, gen)
    xi = riemannian_log(S1, S2)
    for t in (0.25, 0.5, 0.9):
        assert np.allclose(
            geodesic_from_direction(S1, xi, t), geodesic_between(S1, S2, t), atol=1e-9
        )


def test_distance_eigenvalue_formula():
    # diagonal case: closed form from eigenvalue ratios
    S1 = np.diag([1.0, 4.0]).astype(complex)
    S2 = np.diag([2.0, 4.0]).astype(complex)
    params = MetricParams(2.0, 0.5)
    expected = 2.0 * np.log(2.0) ** 2 + 0.5 * np.log(2.0) ** 2
    assert fisher_rao_distance_sq(S1, S2, params) == pytest.approx(expected, rel=1e-12)


def test_distance_symmetry_and_identity():
    gen = rng(17)
    S1 = random_hpd(4, gen)
    S2 = random_hpd(4, gen)
    params = MetricParams(1.0, 0.2)
    assert fisher_rao_distance_sq(S1, S1, params) == pytest.approx(0.0, abs=1e-12)
    assert fisher_rao_distance_sq(S1, S2, params) == pytest.approx(
        fisher_rao_distance_sq(S2, S1, params), rel=1e-9
    )


def test_distance_matches_log_norm():
    gen = rng(18)
    S1 = random_hpd(4, gen)
    S2 = random_hpd(4, gen)
    params = MetricParams(1.3, -0.1)
    xi = riemannian_log(S1, S2)
    assert fisher_rao_distance_sq(S1, S2, params) == pytest.approx(
        metric_inner(S1, xi, xi, params), rel=1e-9
    )


def test_distance_geodesic_additivity():
    gen = rng(19)
    S1 = random_hpd(3, gen)
    S2 = random_hpd(3, gen)
    mid = geodesic_between(S1, S2, 0.5)
    d_full = np.sqrt(fisher_rao_distance_sq(S1, S2))
    d_half = np.sqrt(fisher_rao_distance_sq(S1, mid))
    assert d_half == pytest.approx(0.5 * d_full, rel=1e-9)


def test_euclidean_distance():
    assert euclidean_distance_sq(np.eye(2), 3 * np.eye(2)) == pytest.approx(8.0)


def test_retractions_first_order_agreement():
    gen = rng(20)
    S = random_hpd(4, gen)
    xi = 1e-4 * random_hermitian(4, gen)
    e = riemannian_exp(S, xi)
    assert np.linalg.norm(retract_first_order(S, xi) - e) < 1e-6
    assert np.linalg.norm(retract_second_order(S, xi) - e) < 1e-10


def test_first_order_retraction_left_cone():
    with pytest.raises(LeftCone):
        retract_first_order(np.eye(2), np.diag([-2.0, 0.0]).astype(complex))


def test_second_order_retraction_stays_in_cone():
    gen = rng(21)
    S = random_hpd(3, gen)
    for scale in (0.1, 1.0, 10.0, 100.0):
        xi = scale * random_hermitian(3, gen)
        out = retract_second_order(S, xi)
        assert np.linalg.eigvalsh(out)[0] > 0
    # closed form: eigenvalue map 1 + t + t^2/2 on whitened coordinates
    t = -3.0
    out = retract_second_order(np.eye(2), t * np.eye(2))
    assert np.allclose(out, (1 + t + t * t / 2) * np.eye(2))


def test_connection_residual_zero_direction_and_decay():
    gen = rng(22)
    S = random_hpd(3, gen)
    assert connection_residual(S, np.zeros((3, 3)), 0.5, 1e-3) == 0.0
    xi = random_hermitian(3, gen)
    r1 = connection_residual(S, xi, 0.3, 1e-2)
    r2 = connection_residual(S, xi, 0.3, 1e-3)
    assert r2 < r1
    with pytest.raises(ValueError):
        connection_residual(S, xi, 0.3, 0.5)


def test_geodesic_congruence_equivariance():
    gen = rng(23)
    S1 = random_hpd(4, gen)
    S2 = random_hpd(4, gen)
    U = random_unitary(4, gen)
    inner = geodesic_between(S1, S2, 0.3)
    outer = geodesic_between(U @ S1 @ U.conj().T, U @ S2 @ U.conj().T, 0.3)
    assert np.allclose(outer, U @ inner @ U.conj().T, atol=1e-9)
