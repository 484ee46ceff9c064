"""Hot numeric kernels, dispatched to numba or numpy at import time.

Both backends expose the same functions:

``phi_phic(a)``
    ``(phi(a), 1 - phi(a))`` for a float array ``a >= 0``.
``erf_erfc(x)``
    ``(erf(x), erfc(x))`` for ``x >= 0``.
``supnorm_integrand(t, scales, counts)``
    ``1 - prod_j phi(t / scales[j]) ** counts[j]``.
``counter_uniforms(key, start, count)``
    counter-based uniforms on (0, 1).
``normal_quantile(u)``
    standard normal quantile (AS241).
``gaussian_block(key, start, nsamp, factor)`` / ``norm_block(..., p)``
    correlated Gaussian rows ``factor @ z`` and their ``p``-norms.

Integer arithmetic in the generator is identical across backends, so the
uniform stream is bit-identical; transcendental calls may differ in the last
ulp between numba's libm and numpy's vector routines.
"""

import numpy as np

from . import _kern_numpy
from ._accel import USE_NUMBA

if USE_NUMBA:
    from . import _kern_numba as _impl

    BACKEND = "numba"
else:
    _impl = _kern_numpy
    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "counter_uniforms",
    "erf_erfc",
    "gaussian_block",
    "norm_block",
    "normal_quantile",
    "phi_phic",
    "supnorm_integrand",
]


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _key(key):
    return np.uint64(int(key) & 0xFFFFFFFFFFFFFFFF)


def erf_erfc(x):
    return _impl.erf_erfc(_f64(x))


def phi_phic(a):
    return _impl.phi_phic(_f64(a))


def supnorm_integrand(t, scales, counts):
    return _impl.supnorm_integrand(_f64(t), _f64(scales), _f64(counts))


def counter_uniforms(key, start, count):
    return _impl.counter_uniforms(_key(key), int(start), int(count))


def normal_quantile(u):
    return _impl.normal_quantile(_f64(u))


def gaussian_block(key, start, nsamp, factor):
    return _impl.gaussian_block(_key(key), int(start), int(nsamp), _f64(factor))


def norm_block(key, start, nsamp, factor, p):
    return _impl.norm_block(_key(key), int(start), int(nsamp), _f64(factor), float(p))
