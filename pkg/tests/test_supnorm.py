import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy import special as ssp

from gaussnorm import (
    DomainError,
    QuadratureConfig,
    WeightVector,
    critical_point_residual,
    ek,
    ek_table,
    expected_supnorm,
    median_supnorm,
    partial_derivative,
    phi,
    r_rho,
    r_rho_derivative,
    rder_integrand_sign,
)
from gaussnorm.supnorm import rder_bracket, rho_weights, truncation_point

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
TIGHT = QuadratureConfig(1e-13, 1e-14, 1e-15)


def scipy_supnorm(u):
    """Independent oracle: scipy quad of 1 - prod erf(t / (u_i sqrt2))."""
    u = np.abs(np.asarray(u, dtype=float))
    u = u[u > 0]

    def f(t):
        return -math.expm1(sum(math.log(ssp.erf(t / (s * math.sqrt(2)))) if t > 0 else -math.inf
                               for s in u))

    top = 12.0 * u.max()
    val, _ = sint.quad(f, 0.0, top, epsabs=1e-14, epsrel=1e-13, limit=200,
                       points=sorted(set(u.tolist())))
    return val


def richardson(f, x, h=1e-3):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


class TestWeightVector:
    def test_abs_and_order_kept(self):
        w = WeightVector((-0.3, 0.5, 0.0))
        assert w.entries == (0.3, 0.5, 0.0)
        assert w.canonical().entries == (0.5, 0.3, 0.0)
        np.testing.assert_array_equal(w.positive(), [0.3, 0.5])

    def test_normalized(self):
        w = WeightVector.normalized([3.0, 4.0], 2.0)
        np.testing.assert_allclose(w.entries, [0.6, 0.8], rtol=1e-15)
        assert w.q_norm == 2.0

    def test_normalisation_checked(self):
        with pytest.raises(DomainError):
            WeightVector((0.6, 0.7), 2.0)

    @pytest.mark.parametrize("bad", [(), (0.0, 0.0), (1.0, math.nan), (math.inf,)])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            WeightVector(bad)


class TestExpectedSupnorm:
    def test_single_coordinate(self):
        res = expected_supnorm([1.0])
        assert abs(res.value - SQRT_2_OVER_PI) <= 1e-9
        assert res.method == "quadrature"
        assert res.error_bound >= 0

    def test_n2_invariance(self):
        a = expected_supnorm([0.6, 0.8]).value
        b = expected_supnorm([2**-0.5, 2**-0.5]).value
        np.testing.assert_allclose(a, b, atol=1e-12)
        np.testing.assert_allclose(a, SQRT_2_OVER_PI, atol=1e-12)

    def test_uniform_three(self):
        val = expected_supnorm([3**-0.5] * 3).value
        np.testing.assert_allclose(val, scipy_supnorm([3**-0.5] * 3), rtol=1e-11)
        np.testing.assert_allclose(val, 0.7657897502, atol=1e-9)
        assert val < SQRT_2_OVER_PI

    def test_uniform_three_monte_carlo_oracle(self):
        # numpy's own generator, independent of the package's Monte Carlo
        rng = np.random.default_rng(20240611)
        x = np.abs(rng.standard_normal((4_000_000, 3))).max(axis=1) / math.sqrt(3)
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean() - expected_supnorm([3**-0.5] * 3).value) <= 3 * se

    @pytest.mark.parametrize("u", [[0.2, 0.9, 0.1, 0.4], [5.0, 0.01, 0.01, 2.0, 3.0]])
    def test_against_scipy(self, u):
        np.testing.assert_allclose(expected_supnorm(u, TIGHT).value, scipy_supnorm(u), rtol=1e-11)

    @pytest.mark.parametrize("cfg", [None, TIGHT])
    def test_disparate_scales_n2(self, cfg):
        # exact: E = sqrt(2/pi) ||u||_2 in the plane; thin features must not be missed
        for s in np.geomspace(1e-8, 1.0, 25):
            res = expected_supnorm([1.0, s], cfg)
            exact = SQRT_2_OVER_PI * math.hypot(1.0, s)
            assert abs(res.value - exact) <= res.error_bound

    def test_error_bound_is_honest(self):
        u = [0.3, 0.5, 0.7, 0.1]
        res = expected_supnorm(u)
        assert abs(res.value - scipy_supnorm(u)) <= res.error_bound

    def test_zero_weights_drop_out(self):
        assert expected_supnorm([0.6, 0.0, 0.8]).value == expected_supnorm([0.6, 0.8]).value

    def test_permutation_and_sign_bitwise(self):
        a = expected_supnorm([0.1, -0.7, 0.3]).value
        b = expected_supnorm([0.3, 0.1, 0.7]).value
        c = expected_supnorm(WeightVector((-0.7, 0.3, -0.1)).canonical()).value
        assert a == b == c

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
    def test_homogeneity(self, alpha):
        u = np.array([0.3, 0.5, 0.2, 0.7])
        np.testing.assert_allclose(expected_supnorm(alpha * u).value,
                                   alpha * expected_supnorm(u).value, rtol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=3, max_value=7), st.integers(min_value=0, max_value=10**6))
    def test_extremality(self, n, seed):
        rng = np.random.default_rng(seed)
        u = np.abs(rng.standard_normal(n)) + 1e-2
        u /= np.linalg.norm(u)
        val = expected_supnorm(u).value
        assert ek(n) - 1e-10 <= val < SQRT_2_OVER_PI

    def test_truncation_bound(self):
        T = truncation_point(np.array([1.0]), np.array([1.0]), 1e-13)
        # exact tail sqrt(2/pi) e^{-T^2/2} - T phic(T) is below the bound
        exact = SQRT_2_OVER_PI * math.exp(-0.5 * T * T) - T * ssp.erfc(T / math.sqrt(2))
        assert exact <= 1e-13

    @pytest.mark.parametrize("bad", [[0.0], [math.inf, 1.0]])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            expected_supnorm(bad)


class TestEk:
    def test_first_values(self):
        assert abs(ek(1) - SQRT_2_OVER_PI) <= 1e-9
        assert abs(ek(2) - ek(1)) <= 1e-9
        assert ek(3) < ek(2)

    def test_matches_scipy(self):
        for k in (3, 10, 57):
            np.testing.assert_allclose(ek(k), scipy_supnorm([1.0] * k) / math.sqrt(k), rtol=1e-11)

    def test_domain(self):
        with pytest.raises(DomainError):
            ek(0)

    def test_table(self):
        t = ek_table(50)
        assert [k for k, _ in t.rows] == list(range(1, 51))
        assert t.strictly_decreasing_from_2
        assert t.first_two_gap <= 1e-9
        assert [k for k, _ in t.asymptotic] == list(range(2, 51))

    def test_table_two_rows(self):
        t = ek_table(2)
        np.testing.assert_allclose(t.values[0], t.values[1], atol=1e-12)

    def test_asymptotic_loose(self):
        k = 10**4
        ratio = ek(k) / math.sqrt(math.log(k) / (2 * k))
        assert 0.5 <= ratio <= 2.0


class TestMedian:
    def test_n1(self):
        np.testing.assert_allclose(median_supnorm(1), 0.6744897501960817, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 7, 100, 10**4, 10**6])
    def test_defining_equation(self, n):
        assert abs(phi(median_supnorm(n)) ** n - 0.5) <= 1e-10

    def test_monotone(self):
        m = [median_supnorm(n) for n in range(1, 102)]
        assert np.all(np.diff(m) > 0)

    def test_ratio(self):
        r = median_supnorm(10**4) / math.sqrt(2 * math.log(10**4))
        assert 0.8 <= r <= 1.05


class TestPartialDerivative:
    def test_symmetric_point(self):
        u = [2**-0.5, 2**-0.5]
        d0 = partial_derivative(u, 0)
        d1 = partial_derivative(u, 1)
        np.testing.assert_allclose(d0, d1, rtol=1e-13)
        np.testing.assert_allclose(d0 / u[0], d1 / u[1], rtol=1e-13)

    @pytest.mark.parametrize("u, i", [([0.8, 0.6], 0), ([0.8, 0.6], 1),
                                      ([0.3, 0.5, 0.7, 0.2], 2), ([0.1, 1.0, 0.05], 0)])
    def test_finite_differences(self, u, i):
        def f(x):
            v = list(u)
            v[i] = x
            return expected_supnorm(v, TIGHT).value

        np.testing.assert_allclose(partial_derivative(u, i), richardson(f, u[i]), atol=1e-8)

    def test_euler_identity(self):
        # E is 1-homogeneous, so sum_i u_i dE/du_i = E
        u = [0.3, 0.5, 0.2, 0.7]
        total = sum(u[i] * partial_derivative(u, i) for i in range(4))
        np.testing.assert_allclose(total, expected_supnorm(u).value, rtol=1e-9)

    def test_lone_coordinate(self):
        np.testing.assert_allclose(partial_derivative([0.0, 2.0], 1), SQRT_2_OVER_PI, rtol=1e-15)

    def test_zero_coordinate(self):
        with pytest.raises(DomainError):
            partial_derivative([0.0, 1.0], 0)


class TestResidual:
    def test_uniform_is_critical(self):
        u = [3**-0.5] * 3
        assert abs(critical_point_residual(u, 0, 1)) <= 1e-12

    def test_sign_and_oracle(self):
        u = [0.8, 0.5, math.sqrt(1 - 0.89)]
        r = critical_point_residual(u, 0, 1)
        want = partial_derivative(u, 0) / u[0] - partial_derivative(u, 1) / u[1]
        np.testing.assert_allclose(r, want, atol=1e-9)
        # documented convention: positive when u_i > u_j
        assert r > 0

    def test_antisymmetric(self):
        u = [0.2, 0.9, 0.4, 0.1]
        np.testing.assert_allclose(critical_point_residual(u, 1, 2),
                                   -critical_point_residual(u, 2, 1), rtol=1e-12)

    def test_n2_vanishes(self):
        assert critical_point_residual([0.6, 0.8], 0, 1) == 0.0

    def test_zero_coordinate(self):
        with pytest.raises(DomainError):
            critical_point_residual([0.0, 0.5, 0.5], 0, 1)


class TestRRho:
    def test_endpoints(self):
        np.testing.assert_allclose(r_rho(2, 0.0), expected_supnorm([2**-0.5] * 2).value, rtol=1e-12)
        for n in (2, 3, 6):
            top = 1 / math.sqrt(n + 1)
            # u(0) is the n-dim uniform vector, u(top) the (n+1)-dim one
            np.testing.assert_allclose(r_rho(n, top), ek(n + 1), rtol=1e-10)
            np.testing.assert_allclose(r_rho(n, 0.0), ek(n), rtol=1e-10)

    def test_weights_unit(self):
        np.testing.assert_allclose(np.linalg.norm(rho_weights(3, 0.2).array()), 1.0, rtol=1e-15)

    def test_decreasing(self):
        rho = np.linspace(0.0, 0.5, 26)
        vals = np.array([r_rho(3, r) for r in rho])
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("n, rho", [(2, 0.3), (3, 0.25), (5, 0.4)])
    def test_derivative(self, n, rho):
        fd = richardson(lambda r: r_rho(n, r, TIGHT), rho, 1e-3)
        np.testing.assert_allclose(r_rho_derivative(n, rho), fd, atol=1e-8)
        assert r_rho_derivative(n, rho) < 0

    def test_n1_flat(self):
        assert r_rho_derivative(1, 0.5) == 0.0
        np.testing.assert_allclose(r_rho(1, 0.3), SQRT_2_OVER_PI, atol=1e-12)

    @pytest.mark.parametrize("rho", [-0.01, 0.6])
    def test_range(self, rho):
        with pytest.raises(DomainError):
            r_rho(3, rho)


class TestRderSign:
    def test_n1_equality(self):
        assert rder_integrand_sign(1, 2**-0.5, 0.7) == 0

    def test_zero_at_top(self):
        # rho = 1/sqrt(n+1) makes all n+1 coordinates equal
        for t in (0.5, 3.4, 10.0, 20.0):
            assert rder_integrand_sign(2, 3**-0.5, t) == 0

    def test_direct_evaluation(self):
        n, rho, t = 3, 0.3, 1.0
        a = math.sqrt(n / (1 - rho * rho))
        direct = math.exp(-0.5 * t * t / rho**2) * ssp.erf(t * a / math.sqrt(2)) \
            - rho * a * math.exp(-0.5 * t * t * a * a) * ssp.erf(t / (rho * math.sqrt(2)))
        scaled = rder_bracket(n, rho, t) * math.exp(-0.5 * t * t * a * a)
        np.testing.assert_allclose(scaled, direct, rtol=1e-12)
        assert rder_integrand_sign(n, rho, t) <= 0

    def test_nonpositive_on_grid(self):
        for n in (2, 3, 5, 10):
            for rho in np.linspace(0.02, 1 / math.sqrt(n + 1), 12):
                for t in np.geomspace(1e-3, 20, 40):
                    assert rder_integrand_sign(n, rho, t) <= 0
