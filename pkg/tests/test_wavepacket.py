import numpy as np
import pytest

from movingatom.quadrature import NumericalError
from movingatom.wavepacket import (GaussianPacket, PointMass,
                                   TabulatedProjection, expectation,
                                   gaussian_nodes, project, weighted_sum)

rng = np.random.default_rng(431)


def test_point_mass_projection():
    n = np.array([0.0, 1.0, 0.0])
    proj = project(PointMass(beta=np.array([0.01, 0.02, 0.0])), n)
    assert proj.kind == "point"
    assert proj.nodes.shape == (1,)
    assert proj.nodes[0] == pytest.approx(0.02, rel=1e-15)
    assert proj.weights[0] == 1.0


def test_gaussian_projection_is_exact_marginal():
    mean = np.array([0.01, -0.005, 0.002])
    cov = np.diag([1e-6, 4e-6, 9e-6])
    dist = GaussianPacket(mean=mean, covariance=cov)
    n = np.array([0.0, 0.0, 1.0])
    proj = project(dist, n)
    assert proj.mean == pytest.approx(0.002, rel=1e-14)
    assert proj.sigma == pytest.approx(3e-3, rel=1e-12)
    # quadrature moments reproduce the marginal's mean and variance
    m0 = weighted_sum(proj.weights, np.ones_like(proj.nodes))
    m1 = weighted_sum(proj.weights, proj.nodes)
    m2 = weighted_sum(proj.weights, proj.nodes**2)
    assert m0 == pytest.approx(1.0, rel=1e-13)
    assert m1 == pytest.approx(proj.mean, rel=1e-12)
    assert m2 - m1 * m1 == pytest.approx(proj.sigma**2, rel=1e-10)
    # density closure integrates against nodes consistently
    assert proj.density(proj.mean) == pytest.approx(
        1.0 / (np.sqrt(2 * np.pi) * proj.sigma), rel=1e-12)


def test_gaussian_general_covariance_projection():
    a = rng.normal(size=(3, 3))
    cov = a @ a.T + 1e-6 * np.eye(3)
    mean = rng.normal(scale=0.01, size=3)
    v = rng.normal(size=3)
    n = v / np.linalg.norm(v)
    proj = project(GaussianPacket(mean=mean, covariance=cov), n)
    assert proj.mean == pytest.approx(float(n @ mean), rel=1e-12)
    assert proj.sigma == pytest.approx(float(np.sqrt(n @ cov @ n)), rel=1e-12)


def test_covariance_validation():
    with pytest.raises(ValueError):
        GaussianPacket(mean=np.zeros(3), covariance=np.diag([1.0, 1.0, -1.0]))
    asym = np.diag([1.0, 1.0, 1.0]).astype(float)
    asym[0, 1] = 0.5
    with pytest.raises(ValueError):
        GaussianPacket(mean=np.zeros(3), covariance=asym)


def test_tabulated_projection_checks_direction():
    direction = np.array([1.0, 0.0, 0.0])
    tab = TabulatedProjection(delta=np.array([-0.01, 0.0, 0.01]),
                              weights=np.array([0.25, 0.5, 0.25]),
                              direction=direction)
    proj = project(tab, direction)
    assert np.array_equal(proj.nodes, tab.delta)
    with pytest.raises(ValueError):
        project(tab, np.array([0.0, 1.0, 0.0]))


def test_tabulated_weights_must_be_normalized():
    with pytest.raises(ValueError):
        TabulatedProjection(delta=np.array([0.0, 0.1]),
                            weights=np.array([0.6, 0.6]),
                            direction=np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        TabulatedProjection(delta=np.array([0.0, 0.1]),
                            weights=np.array([1.2, -0.2]),
                            direction=np.array([1.0, 0.0, 0.0]))


def test_expectation_point_mass_is_exact():
    beta = np.array([0.01, 0.0, -0.02])
    res = expectation(PointMass(beta), lambda b: b[:, 0] + 2 * b[:, 2])
    assert res.value == 0.01 - 0.04
    assert res.error == 0.0


def test_expectation_gaussian_polynomial_moments():
    # E[(a.beta)^2] = (a.mu)^2 + a.Sigma.a, exact for Gauss-Hermite
    mean = np.array([0.01, -0.02, 0.005])
    cov = np.diag([1e-4, 2e-4, 5e-5])
    dist = GaussianPacket(mean=mean, covariance=cov)
    a = np.array([0.3, -1.2, 0.7])
    res = expectation(dist, lambda b: (b @ a) ** 2, order=8)
    expected = float((a @ mean) ** 2 + a @ cov @ a)
    assert res.value == pytest.approx(expected, rel=1e-13)
    assert res.error <= 1e-13 * abs(expected) + 1e-18


def test_expectation_error_estimate_decreases_with_order():
    dist = GaussianPacket.isotropic(np.zeros(3), 0.05)
    f = lambda b: np.cos(25.0 * b[:, 0]) * np.exp(b[:, 1])
    low = expectation(dist, f, order=6)
    high = expectation(dist, f, order=24)
    assert high.error < low.error


def test_rank_one_packet_uses_one_active_dimension():
    direction = np.array([1.0, 0.0, 0.0])
    dist = GaussianPacket.along_direction(np.zeros(3), 1e-3, direction)
    nodes, weights = gaussian_nodes(dist, order=12)
    assert nodes.shape == (12, 3)           # not 12**3: degenerate axes dropped
    assert np.allclose(nodes[:, 1:], 0.0, atol=1e-18)
    assert weights.sum() == pytest.approx(1.0, rel=1e-13)


def test_isotropic_nodes_tensor_count():
    dist = GaussianPacket.isotropic(np.zeros(3), 1e-3)
    nodes, weights = gaussian_nodes(dist, order=5)
    assert nodes.shape == (125, 3)
    assert weights.sum() == pytest.approx(1.0, rel=1e-12)


def test_pure_equals_mixture_bitwise():
    """Evaluating through expectation() must equal treating the quadrature
    nodes as an explicit point-mass mixture, reduced the same way."""
    dist = GaussianPacket.isotropic(np.array([0.002, 0.0, -0.001]), 5e-4)
    f = lambda b: 1.0 / (1.0 + (b[:, 0] - 3 * b[:, 2]) ** 2)
    res = expectation(dist, f, order=14, with_error=False)
    nodes, weights = gaussian_nodes(dist, order=14)
    mixture = weighted_sum(weights, f(nodes))
    assert res.value == mixture  # bit-for-bit


def test_non_finite_integrand_reports_node():
    dist = GaussianPacket.isotropic(np.zeros(3), 1e-3)

    def exploding(b):
        out = np.ones(b.shape[0])
        out[0] = np.nan
        return out

    with pytest.raises(NumericalError):
        expectation(dist, exploding, order=6)


def test_weighted_sum_reduction_semantics():
    w = np.array([0.25, 0.25, 0.5])
    v = np.array([1.0, 2.0, 3.0])
    assert weighted_sum(w, v) == float(np.sum(w * v))
