"""numba-compiled kernels; contracts identical to ``_kern_numpy``."""

import math

import numpy as np
from numba import njit

from ._kern_numpy import (
    _A,
    _B,
    _C,
    _D,
    _E,
    _F,
    CF_DEPTHS,
    ERFC_ZERO,
    INV_SQRTPI,
    SERIES_CUT,
    SQRT1_2,
    TWO_INV_SQRTPI,
)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 2.0**-53

_AA = np.array(_A)
_BB = np.array(_B)
_CC = np.array(_C)
_DD = np.array(_D)
_EE = np.array(_E)
_FF = np.array(_F)
_CF_HI = np.array([b[0] for b in CF_DEPTHS])
_CF_DEPTH = np.array([b[1] for b in CF_DEPTHS])


@njit(cache=True, nogil=True)
def _expmx2(x):
    xs = math.floor(x * 16.0) / 16.0
    return math.exp(-xs * xs) * math.exp(-(x - xs) * (x + xs))


@njit(cache=True, nogil=True)
def _expmhalf(a):
    h = math.floor(a * 16.0) / 16.0
    return math.exp(-0.5 * h * h) * math.exp(-0.5 * (a - h) * (a + h))


@njit(cache=True, nogil=True)
def _erf_erfc_scalar(x, g):
    if x < SERIES_CUT:
        x2 = 2.0 * x * x
        term = x
        s = x
        comp = 0.0
        k = 0
        while True:
            k += 1
            term = term * (x2 / (2 * k + 1))
            y = term - comp
            tot = s + y
            comp = (tot - s) - y
            s = tot
            if term <= 1e-17 * s:
                break
        e = TWO_INV_SQRTPI * g * s
        return e, 1.0 - e
    if x >= ERFC_ZERO:
        return 1.0, 0.0
    if x < 2.0:
        depth = 100
    elif x < 3.0:
        depth = 60
    elif x < 6.0:
        depth = 40
    else:
        depth = 20
    f = x
    for k in range(depth, 0, -1):
        f = x + (0.5 * k) / f
    c = g * INV_SQRTPI / f
    return 1.0 - c, c


@njit(cache=True, nogil=True)
def _erf_erfc_into(x, g, erf, erfc):
    # continued-fraction arguments are batched per depth bucket so the
    # recurrence runs element-inner and pipelines instead of stalling on
    # one division chain per element
    n = x.shape[0]
    idx = np.empty(n, np.int64)
    m = 0
    for i in range(n):
        xi = x[i]
        if xi < SERIES_CUT or xi >= ERFC_ZERO:
            erf[i], erfc[i] = _erf_erfc_scalar(xi, g[i])
        else:
            idx[m] = i
            m += 1
    if m == 0:
        return
    lo = SERIES_CUT
    for b in range(4):
        hi = _CF_HI[b]
        depth = _CF_DEPTH[b]
        sel = np.empty(m, np.int64)
        c = 0
        for j in range(m):
            xj = x[idx[j]]
            if xj >= lo and xj < hi:
                sel[c] = idx[j]
                c += 1
        lo = hi
        if c == 0:
            continue
        xs = np.empty(c)
        f = np.empty(c)
        for j in range(c):
            xs[j] = x[sel[j]]
            f[j] = xs[j]
        for k in range(depth, 0, -1):
            hk = 0.5 * k
            for j in range(c):
                f[j] = xs[j] + hk / f[j]
        for j in range(c):
            v = g[sel[j]] * INV_SQRTPI / f[j]
            erf[sel[j]] = 1.0 - v
            erfc[sel[j]] = v


@njit(cache=True, nogil=True)
def erf_erfc(x):
    n = x.shape[0]
    erf = np.empty(n)
    erfc = np.empty(n)
    g = np.empty(n)
    for i in range(n):
        g[i] = _expmx2(x[i])
    _erf_erfc_into(x, g, erf, erfc)
    return erf, erfc


@njit(cache=True, nogil=True)
def phi_phic(a):
    n = a.shape[0]
    erf = np.empty(n)
    erfc = np.empty(n)
    x = np.empty(n)
    g = np.empty(n)
    for i in range(n):
        x[i] = a[i] * SQRT1_2
        g[i] = _expmhalf(a[i])
    _erf_erfc_into(x, g, erf, erfc)
    return erf, erfc


@njit(cache=True, nogil=True)
def supnorm_integrand(t, scales, counts):
    n = t.shape[0]
    acc = np.zeros(n)
    a = np.empty(n)
    x = np.empty(n)
    g = np.empty(n)
    p = np.empty(n)
    c = np.empty(n)
    for j in range(scales.shape[0]):
        for i in range(n):
            a[i] = t[i] / scales[j]
            x[i] = a[i] * SQRT1_2
            g[i] = _expmhalf(a[i])
        _erf_erfc_into(x, g, p, c)
        m = counts[j]
        for i in range(n):
            if p[i] == 0.0:
                acc[i] = -np.inf
            elif c[i] > 0.5:
                acc[i] += m * math.log(p[i])
            else:
                acc[i] += m * math.log1p(-c[i])
    out = np.empty(n)
    for i in range(n):
        out[i] = -math.expm1(acc[i])
    return out


@njit(cache=True, nogil=True)
def _uniform(key, counter):
    z = key + (counter + _ONE) * _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return (np.float64(z >> _S11) + 0.5) * _TWO_M53


@njit(cache=True, nogil=True)
def counter_uniforms(key, start, count):
    out = np.empty(count)
    k = np.uint64(key)
    s = np.uint64(start)
    for i in range(count):
        out[i] = _uniform(k, s + np.uint64(i))
    return out


@njit(cache=True, nogil=True)
def _horner(coef, r):
    out = coef[0]
    for i in range(1, coef.shape[0]):
        out = out * r + coef[i]
    return out


@njit(cache=True, nogil=True)
def _ndtri(u):
    q = u - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _horner(_AA, r) / _horner(_BB, r)
    r = u if q < 0.0 else 1.0 - u
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        x = _horner(_CC, r) / _horner(_DD, r)
    else:
        r -= 5.0
        x = _horner(_EE, r) / _horner(_FF, r)
    return -x if q < 0.0 else x


@njit(cache=True, nogil=True)
def normal_quantile(u):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _ndtri(u[i])
    return out


@njit(cache=True, nogil=True)
def gaussian_block(key, start, nsamp, factor):
    n, m = factor.shape
    out = np.empty((nsamp, n))
    z = np.empty(m)
    k = np.uint64(key)
    for s in range(nsamp):
        base = np.uint64((start + s) * m)
        for j in range(m):
            z[j] = _ndtri(_uniform(k, base + np.uint64(j)))
        for i in range(n):
            acc = 0.0
            for j in range(m):
                acc += factor[i, j] * z[j]
            out[s, i] = acc
    return out


@njit(cache=True, nogil=True)
def norm_block(key, start, nsamp, factor, p):
    n, m = factor.shape
    out = np.empty(nsamp)
    z = np.empty(m)
    k = np.uint64(key)
    sup = np.isinf(p)
    for s in range(nsamp):
        base = np.uint64((start + s) * m)
        for j in range(m):
            z[j] = _ndtri(_uniform(k, base + np.uint64(j)))
        acc = 0.0
        for i in range(n):
            x = 0.0
            for j in range(m):
                x += factor[i, j] * z[j]
            x = abs(x)
            if sup:
                if x > acc:
                    acc = x
            elif p == 2.0:
                acc += x * x
            else:
                acc += x**p
        if sup:
            out[s] = acc
        elif p == 2.0:
            out[s] = math.sqrt(acc)
        else:
            out[s] = acc ** (1.0 / p)
    return out
