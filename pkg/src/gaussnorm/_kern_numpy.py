"""Vectorised numpy kernels.

Same contracts as ``_kern_numba``; used when numba is unavailable or
disabled through ``GAUSSNORM_DISABLE_NUMBA``.
"""

import numpy as np

SQRT1_2 = 0.7071067811865476
INV_SQRTPI = 0.5641895835477563
TWO_INV_SQRTPI = 1.1283791670955126
SERIES_CUT = 1.5
ERFC_ZERO = 27.5

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0**-53

# continued-fraction depth by argument bucket: (upper bound, depth)
CF_DEPTHS = ((2.0, 100), (3.0, 60), (6.0, 40), (ERFC_ZERO, 20))


def _expmx2(x):
    # exp(-x*x) without the relative error of rounding x*x
    xs = np.floor(x * 16.0) / 16.0
    return np.exp(-xs * xs) * np.exp(-(x - xs) * (x + xs))


def _expmhalf(a):
    # exp(-a*a/2) from a itself; going through a/sqrt2 costs a^2 ulps
    h = np.floor(a * 16.0) / 16.0
    return np.exp(-0.5 * h * h) * np.exp(-0.5 * (a - h) * (a + h))


def erf_erfc(x):
    """Return ``(erf(x), erfc(x))`` for a float array with ``x >= 0``."""
    x = np.asarray(x, dtype=np.float64)
    return _erf_erfc_core(x, _expmx2(x))


def _erf_erfc_core(x, g):
    # g = exp(-x*x), supplied by the caller
    erf = np.empty_like(x)
    erfc = np.empty_like(x)

    small = x < SERIES_CUT
    if small.any():
        xs = x[small]
        x2 = 2.0 * xs * xs
        term = xs.copy()
        s = xs.copy()
        comp = np.zeros_like(xs)
        k = 0
        while True:
            k += 1
            term = term * (x2 / (2 * k + 1))
            y = term - comp
            tot = s + y
            comp = (tot - s) - y
            s = tot
            if np.all(term <= 1e-17 * s):
                break
        e = TWO_INV_SQRTPI * g[small] * s
        erf[small] = e
        erfc[small] = 1.0 - e

    lo = SERIES_CUT
    for hi, depth in CF_DEPTHS:
        sel = (x >= lo) & (x < hi)
        lo = hi
        if not sel.any():
            continue
        xs = x[sel]
        f = xs.copy()
        for k in range(depth, 0, -1):
            f = xs + (0.5 * k) / f
        c = g[sel] * INV_SQRTPI / f
        erf[sel] = 1.0 - c
        erfc[sel] = c

    big = x >= ERFC_ZERO
    erf[big] = 1.0
    erfc[big] = 0.0
    return erf, erfc


def phi_phic(a):
    """``phi(a) = erf(a/sqrt2)`` and its complement, for ``a >= 0``."""
    a = np.asarray(a, dtype=np.float64)
    return _erf_erfc_core(a * SQRT1_2, _expmhalf(a))


def supnorm_integrand(t, scales, counts):
    """``1 - prod_j phi(t/scales[j])**counts[j]`` evaluated in log space."""
    t = np.asarray(t, dtype=np.float64)
    acc = np.zeros_like(t)
    with np.errstate(divide="ignore"):
        for s, m in zip(scales, counts):
            p, c = phi_phic(t / s)
            acc += m * np.where(c > 0.5, np.log(p), np.log1p(-c))
    return -np.expm1(acc)


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(key, start, count):
    """Uniforms in (0, 1) at counters ``start .. start+count-1`` of stream ``key``."""
    c = np.arange(start, start + count, dtype=np.uint64)
    z = np.uint64(key) + (c + np.uint64(1)) * GOLDEN
    z = _mix64(z)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def _poly(coef, r):
    out = np.full_like(r, coef[0])
    for c in coef[1:]:
        out = out * r + c
    return out


# Wichura AS241 (PPND16) coefficients, highest degree first
_A = (2509.0809287301226727, 33430.575583588128105, 67265.770927008700853,
      45921.953931549871457, 13731.693765509461125, 1971.5909503065514427,
      133.14166789178437745, 3.387132872796366608)
_B = (5226.495278852854561, 28729.085735721942674, 39307.89580009271061,
      21213.794301586595867, 5394.1960214247511077, 687.1870074920579083,
      42.313330701600911252, 1.0)
_C = (7.7454501427834140764e-4, 0.0227238449892691845833, 0.24178072517745061177,
      1.27045825245236838258, 3.64784832476320460504, 5.7694972214606914055,
      4.6303378461565452959, 1.42343711074968357734)
_D = (1.05075007164441684324e-9, 5.475938084995344946e-4, 0.0151986665636164571966,
      0.14810397642748007459, 0.68976733498510000455, 1.6763848301838038494,
      2.05319162663775882187, 1.0)
_E = (2.01033439929228813265e-7, 2.71155556874348757815e-5, 0.0012426609473880784386,
      0.026532189526576123093, 0.29656057182850489123, 1.7848265399172913358,
      5.4637849111641143699, 6.6579046435011037772)
_F = (2.04426310338993978564e-15, 1.4215117583164458887e-7, 1.8463183175100546818e-5,
      7.868691311456132591e-4, 0.0148753612908506148525, 0.13692988092273580531,
      0.59983220655588793769, 1.0)


def normal_quantile(u):
    """Standard normal quantile for ``0 < u < 1`` (AS241)."""
    u = np.asarray(u, dtype=np.float64)
    q = u - 0.5
    out = np.empty_like(u)
    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _poly(_A, r) / _poly(_B, r)
    tail = ~central
    if tail.any():
        qt = q[tail]
        r = np.where(qt < 0.0, u[tail], 1.0 - u[tail])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        x = np.empty_like(r)
        rn = r[near] - 1.6
        x[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = r[~near] - 5.0
        x[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(qt < 0.0, -x, x)
    return out


def gaussian_block(key, start, nsamp, factor):
    """Rows ``start .. start+nsamp-1`` of the stream ``X = factor @ z``."""
    n, m = factor.shape
    u = counter_uniforms(key, start * m, nsamp * m)
    z = normal_quantile(u).reshape(nsamp, m)
    return z @ factor.T


def norm_block(key, start, nsamp, factor, p):
    """``||X||_p`` for each sampled row; ``p = inf`` gives the sup-norm."""
    x = np.abs(gaussian_block(key, start, nsamp, factor))
    if np.isinf(p):
        return x.max(axis=1)
    if p == 2.0:
        return np.sqrt(np.sum(x * x, axis=1))
    return np.sum(x**p, axis=1) ** (1.0 / p)
