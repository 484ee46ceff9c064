"""Gaussian special functions in double precision.

``phi(a) = erf(a / sqrt(2))`` is the probability that a standard normal
variable lands in ``[-a, a]``. All public functions accept scalars or
arrays and return a float for scalar input.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)

# below this abscissa F and f use their power series
_SERIES_LIMIT = 5.0


def _nonneg(a, name="a"):
    arr = np.asarray(a, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0 (pass absolute values), got {a!r}")
    return arr


def _out(arr, like):
    return float(arr.reshape(-1)[0]) if np.ndim(like) == 0 else arr


def phi(a):
    """sqrt(2/pi) * integral_0^a exp(-s^2/2) ds, with ``phi(inf) == 1``."""
    arr = _nonneg(a)
    p, _ = kernels.phi_phic(arr.reshape(-1))
    return _out(p.reshape(arr.shape), a)


def phic(a):
    """Complement ``1 - phi(a)``, computed without cancellation for large a."""
    arr = _nonneg(a)
    _, c = kernels.phi_phic(arr.reshape(-1))
    return _out(c.reshape(arr.shape), a)


def _pdf2(a):
    # derivative of phi
    return SQRT_2_OVER_PI * np.exp(-0.5 * a * a)


def phi_inv(p):
    """Inverse of ``phi`` on ``[0, 1)``."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr >= 1):
        raise DomainError(f"phi_inv needs 0 <= p < 1, got {p!r}")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    low = flat <= 0.5
    if low.any():
        pl = flat[low]
        a = kernels.normal_quantile(0.5 + 0.5 * pl)
        for _ in range(3):
            a = a - (kernels.phi_phic(a)[0] - pl) / _pdf2(a)
            a = np.maximum(a, 0.0)
        out[low] = a
    if (~low).any():
        out[~low] = _phic_inv_flat(1.0 - flat[~low])
    return _out(out.reshape(arr.shape), p)


def _phic_inv_flat(q):
    out = np.empty_like(q)
    big = q >= 0.5
    if big.any():
        out[big] = phi_inv(1.0 - q[big])
    small = ~big
    if small.any():
        qs = q[small]
        with np.errstate(divide="ignore"):
            a = -kernels.normal_quantile(0.5 * qs)
            for _ in range(4):
                c = kernels.phi_phic(a)[1]
                a = a + (np.log(c) - np.log(qs)) * c / _pdf2(a)
        out[small] = np.where(qs == 0.0, np.inf, a)
    return out


def phic_inv(q):
    """``a >= 0`` with ``1 - phi(a) = q``, accurate for tiny ``q``."""
    arr = np.asarray(q, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"phic_inv needs 0 <= q <= 1, got {q!r}")
    out = _phic_inv_flat(arr.reshape(-1))
    return _out(out.reshape(arr.shape), q)


def tail_integral(c):
    """``integral_c^inf (1 - phi(t)) dt = sqrt(2/pi) e^{-c^2/2} - c (1 - phi(c))``."""
    arr = _nonneg(c, "c")
    flat = arr.reshape(-1)
    out = SQRT_2_OVER_PI * np.exp(-0.5 * flat * flat) - flat * kernels.phi_phic(flat)[1]
    return _out(np.maximum(out, 0.0).reshape(arr.shape), c)


def tail_integral_bound(c):
    """Upper bound ``sqrt(2/pi) e^{-c^2/2} / (1 + c^2)`` on ``tail_integral(c)``."""
    arr = _nonneg(c, "c")
    return _out(SQRT_2_OVER_PI * np.exp(-0.5 * arr * arr) / (1.0 + arr * arr), c)


@dataclass(frozen=True)
class EvalPoint:
    """Abscissa ``x >= 0`` and exponent ``0 < q <= 2``."""

    x: float
    q: float = 2.0

    def __post_init__(self):
        if not (self.x >= 0 and math.isfinite(self.x)):
            raise DomainError(f"x must be finite and >= 0, got {self.x!r}")
        if not (0 < self.q <= 2):
            raise DomainError(f"q must lie in (0, 2], got {self.q!r}")


def _check_q(q):
    if not (0 < q <= 2):
        raise DomainError(f"q must lie in (0, 2], got {q!r}")


def _unpack(x, q):
    if isinstance(x, EvalPoint):
        return x.x, x.q
    return x, q


def gauss_mills(x):
    """``exp(x^2/2) * integral_0^x exp(-t^2/2) dt`` for ``x >= 0``."""
    arr = _nonneg(x, "x")
    return _out(_gauss_mills_flat(arr.reshape(-1)).reshape(arr.shape), x)


def _h_over_x(x):
    # sum_k x^(2k) / (2k+1)!!, all terms positive
    term = np.ones_like(x)
    s = np.ones_like(x)
    x2 = x * x
    k = 0
    while True:
        k += 1
        term = term * x2 / (2 * k + 1)
        s = s + term
        if np.all(term <= 1e-17 * s):
            return s


def _gauss_mills_flat(x):
    out = np.empty_like(x)
    small = x < _SERIES_LIMIT
    out[small] = x[small] * _h_over_x(x[small])
    big = ~small
    xb = x[big]
    with np.errstate(over="ignore"):
        out[big] = np.exp(0.5 * xb * xb) * SQRT_PI_OVER_2 * kernels.phi_phic(xb)[0]
    return out


def lemma1_F(x, q=2.0):
    """``F(x) = exp(x^2/2) x^(1-q) integral_0^x exp(-t^2/2) dt`` for ``x > 0``.

    Evaluated as ``x^(2-q) * (H(x)/x)`` so that ``x -> 0`` is stable; the
    limit at zero is 1 for ``q = 2`` and 0 for ``q < 2``.
    """
    x, q = _unpack(x, q)
    _check_q(q)
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr <= 0):
        raise DomainError(f"lemma1_F needs x > 0, got {x!r}")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    small = flat < _SERIES_LIMIT
    out[small] = flat[small] ** (2.0 - q) * _h_over_x(flat[small])
    big = ~small
    out[big] = flat[big] ** (1.0 - q) * _gauss_mills_flat(flat[big])
    return _out(out.reshape(arr.shape), x)


def lemma1_f(x, q=2.0):
    """Numerator ``f(x) = x + (x^2 - q + 1) H(x)`` of ``F'(x) = f(x) / x^q``.

    For small x the equivalent series ``sum_k (2k+2-q) x^(2k+1) / (2k+1)!!``
    is used; every term is nonnegative when ``q <= 2``.
    """
    x, q = _unpack(x, q)
    _check_q(q)
    arr = _nonneg(x, "x")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    small = flat < _SERIES_LIMIT
    xs = flat[small]
    if xs.size:
        x2 = xs * xs
        odd = xs.copy()  # x^(2k+1) / (2k+1)!!
        s = (2.0 - q) * odd
        k = 0
        while True:
            k += 1
            odd = odd * x2 / (2 * k + 1)
            term = (2 * k + 2 - q) * odd
            s = s + term
            if np.all(term <= 1e-17 * s):
                break
        out[small] = s
    big = ~small
    xb = flat[big]
    out[big] = xb + (xb * xb - q + 1.0) * _gauss_mills_flat(xb)
    return _out(out.reshape(arr.shape), x)
