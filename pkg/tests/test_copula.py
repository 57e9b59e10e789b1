import math

import numpy as np
import pytest

from maxentos import (CopulaKernel, MarginalVector, Multidiagonal,
                      c_F_density, c_delta_density, copula_entropy_closed,
                      j_functional_delta, ks_distance,
                      multidiagonal_of_iid_uniform, order_stat_copula_entropy,
                      sample_copula, symmetrize_density, unsymmetrize_density)
from maxentos.cdfs import OrderStatUniformCdf, UniformCdf
from maxentos.errors import InvalidMarginal, NotAbsolutelyContinuous, OutOfPsi
from maxentos.verify import quad_entropy, simplex_integral


@pytest.fixture(scope="module")
def beta2_kernel(beta2_delta):
    return CopulaKernel(beta2_delta)


def test_first_kernel_is_log_survival(beta2_kernel, beta2_delta):
    t = np.linspace(0.05, 0.95, 41)
    top = beta2_delta.components[0]
    expect = -np.log(np.asarray(top.sf(t), dtype=float))
    assert np.allclose(beta2_kernel.K(1, t), expect, rtol=1e-12)
    with pytest.raises(OutOfPsi):
        # the last kernel set excludes the region below the support of
        # the bottom component's positive-gap zone at 0
        beta2_kernel.K(2, np.array([-0.5]))


def test_factors_match_kernel_derivatives(beta2_kernel):
    # a_i = K_i' exp(K_{i+1} - K_i), checked against central differences
    t = np.linspace(0.1, 0.9, 25)
    h = 1e-6
    for i in (1, 2):
        kp = (np.asarray(beta2_kernel.K(i, t + h))
              - np.asarray(beta2_kernel.K(i, t - h))) / (2 * h)
        knext = (np.zeros_like(t) if i + 1 == beta2_kernel.d + 1
                 else np.asarray(beta2_kernel.K(i + 1, t)))
        expect = kp * np.exp(knext - np.asarray(beta2_kernel.K(i, t)))
        assert np.allclose(beta2_kernel.a(i, t), expect, rtol=1e-6)


def test_density_normalizes(beta2_kernel):
    # exchangeable density, so integrate the smooth ordered region and scale
    val = math.factorial(2) * simplex_integral(
        lambda U: c_delta_density(beta2_kernel, U), 2, 0.0, 1.0)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_density_exchangeable(beta2_kernel):
    rng = np.random.default_rng(2)
    U = rng.random((300, 2))
    a = c_delta_density(beta2_kernel, U)
    b = c_delta_density(beta2_kernel, U[:, ::-1])
    assert np.allclose(a, b, rtol=1e-12)


def test_density_zero_outside_box(beta2_kernel):
    U = np.array([[-0.1, 0.5], [0.5, 1.2], [2.0, 2.0]])
    assert np.all(c_delta_density(beta2_kernel, U) == 0.0)


def test_dual_kernel_routes_agree(beta2_delta):
    auto = CopulaKernel(beta2_delta)
    quad = CopulaKernel(beta2_delta, mode="quadrature")
    rng = np.random.default_rng(3)
    U = rng.random((400, 2))
    a = c_delta_density(auto, U)
    b = c_delta_density(quad, U)
    assert np.array_equal(a > 0, b > 0)
    m = a > 0
    assert np.max(np.abs(a[m] - b[m]) / a[m]) <= 1e-9


def test_independence_fixture_is_flat():
    kernel = CopulaKernel(multidiagonal_of_iid_uniform(2))
    rng = np.random.default_rng(5)
    U = rng.random((500, 2))
    assert np.allclose(c_delta_density(kernel, U), 1.0, atol=1e-10)
    assert copula_entropy_closed(multidiagonal_of_iid_uniform(2)) == \
        pytest.approx(0.0, abs=1e-12)


def test_copula_entropy_closed_vs_quadrature(beta2_delta, beta2_kernel):
    closed = copula_entropy_closed(beta2_delta)
    parts = (-j_functional_delta(beta2_delta) + math.log(2.0) + 1.0
             + sum(c.entropy() for c in beta2_delta.components))
    assert closed == pytest.approx(parts, abs=1e-12)
    hq = 2.0 * quad_entropy(lambda U: c_delta_density(beta2_kernel, U),
                            2, 0.0, 1.0)
    assert hq == pytest.approx(closed, abs=1e-6)
    # the order-statistics copula itself has entropy d - 1 - J
    assert order_stat_copula_entropy(beta2_delta) == pytest.approx(-1.0, abs=1e-12)


def test_shift_of_order_stat_copula_is_exchangeable_copula(beta2, beta2_delta,
                                                           beta2_kernel):
    # symmetrizing the order-statistics copula density lands exactly on
    # the exchangeable maximum-entropy copula of the multidiagonal
    sfun = symmetrize_density(beta2_delta, lambda U: c_F_density(beta2, U))
    rng = np.random.default_rng(11)
    U = rng.random((400, 2))
    a = sfun(U)
    b = c_delta_density(beta2_kernel, U)
    assert np.array_equal(a > 0, b > 0)
    m = b > 0
    assert np.max(np.abs(a[m] - b[m]) / b[m]) <= 1e-9


def test_unsymmetrize_inverts_on_ordered_image(beta2, beta2_delta):
    cfun = lambda U: c_F_density(beta2, U)
    back = unsymmetrize_density(beta2_delta, symmetrize_density(beta2_delta, cfun))
    rng = np.random.default_rng(13)
    U = rng.random((500, 2))
    a, b = cfun(U), back(U)
    assert np.array_equal(a > 0, b > 0)
    m = a > 0
    assert np.max(np.abs(a[m] - b[m]) / a[m]) <= 1e-9


def test_sampler_recovers_components(beta2_delta):
    kernel = CopulaKernel(beta2_delta)
    n = 4000
    S = sample_copula(kernel, n, seed=0)
    assert S.shape == (n, 2)
    assert np.all((S > 0.0) & (S < 1.0))
    bound = 1.63 / math.sqrt(n)
    # coordinates are uniform, sorted coordinates follow the components
    for j in range(2):
        assert ks_distance(S[:, j], lambda s: s) < bound * 1.5
    V = np.sort(S, axis=1)
    for i in range(2):
        assert ks_distance(V[:, i], beta2_delta.components[i].cdf) < bound * 1.5
    assert np.array_equal(S, sample_copula(kernel, n, seed=0))
    assert not np.array_equal(S, sample_copula(kernel, n, seed=1))


def test_comonotone_multidiagonal_has_no_density():
    comonotone = Multidiagonal((UniformCdf(0.0, 1.0), UniformCdf(0.0, 1.0)))
    kernel = CopulaKernel(comonotone)
    with pytest.raises(NotAbsolutelyContinuous):
        c_delta_density(kernel, np.array([[0.3, 0.6]]))
    with pytest.raises(NotAbsolutelyContinuous):
        sample_copula(kernel, 10)


def test_kernel_rejects_non_multidiagonal():
    with pytest.raises(InvalidMarginal):
        CopulaKernel(Multidiagonal((UniformCdf(0.0, 1.0),
                                    OrderStatUniformCdf(2, 2))))
