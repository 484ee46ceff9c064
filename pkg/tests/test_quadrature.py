import math

import numpy as np
import pytest
from scipy import integrate as sint

from gaussnorm import DomainError, QuadratureConfig
from gaussnorm.quadrature import integrate


class TestIntegrate:
    @pytest.mark.parametrize("f, a, b, exact", [
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (np.sin, 0.0, math.pi, 2.0),
        (lambda x: x**7, -1.0, 2.0, (2.0**8 - 1.0) / 8.0),
        (lambda x: np.exp(-0.5 * x * x), 0.0, 40.0, math.sqrt(math.pi / 2.0)),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0, math.pi / 4.0),
    ])
    def test_closed_forms(self, f, a, b, exact):
        res = integrate(f, a, b, rel_tol=1e-13, abs_tol=1e-15)
        assert res.converged
        np.testing.assert_allclose(res.value, exact, rtol=1e-13)
        assert abs(res.value - exact) <= max(res.error, 1e-15)

    def test_sqrt_endpoint_singularity(self):
        # adaptive refinement must cope with the derivative blow-up at 0
        res = integrate(np.sqrt, 0.0, 1.0, rel_tol=1e-10, abs_tol=0.0)
        np.testing.assert_allclose(res.value, 2.0 / 3.0, rtol=1e-10)

    def test_agrees_with_scipy(self):
        f = lambda x: np.cos(3 * x) * np.exp(-x)  # noqa: E731
        want, _ = sint.quad(lambda x: math.cos(3 * x) * math.exp(-x), 0, 5, epsabs=1e-14, epsrel=1e-13)
        np.testing.assert_allclose(integrate(f, 0, 5, 1e-13, 1e-15).value, want, rtol=1e-12)

    def test_reversed_limits(self):
        a = integrate(np.exp, 0.0, 1.0).value
        b = integrate(np.exp, 1.0, 0.0).value
        assert b == -a

    def test_empty_interval(self):
        res = integrate(np.exp, 2.0, 2.0)
        assert res.value == 0.0 and res.converged

    def test_breakpoints_kink(self):
        f = lambda x: np.abs(x - 0.3)  # noqa: E731
        res = integrate(f, 0.0, 1.0, rel_tol=1e-14, abs_tol=1e-16, breakpoints=[0.3])
        np.testing.assert_allclose(res.value, 0.5 * (0.3**2 + 0.7**2), rtol=1e-14)

    def test_infinite_limit_rejected(self):
        with pytest.raises(DomainError):
            integrate(np.exp, 0.0, math.inf)

    def test_nonfinite_integrand(self):
        with pytest.raises(FloatingPointError):
            integrate(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)


class TestConfig:
    def test_defaults(self):
        cfg = QuadratureConfig()
        assert (cfg.rel_tol, cfg.abs_tol, cfg.tail_epsilon) == (1e-10, 1e-12, 1e-13)

    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"abs_tol": -1.0},
                                    {"tail_epsilon": math.inf}, {"tail_epsilon": 1e-12}])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            QuadratureConfig(**kw)

    def test_tightened(self):
        cfg = QuadratureConfig().tightened(0.1)
        np.testing.assert_allclose([cfg.rel_tol, cfg.abs_tol, cfg.tail_epsilon], [1e-11, 1e-13, 1e-14])
