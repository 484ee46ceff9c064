"""Expected sup-norm of coordinate-scaled standard Gaussian vectors.

Everything rests on the representation

    E max_i |u_i xi_i| = integral_0^inf (1 - prod_i phi(t / u_i)) dt,

evaluated by adaptive Gauss-Kronrod quadrature on ``[0, T]`` with ``T``
chosen from a rigorous bound on the discarded tail mass.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .quadrature import QuadratureConfig, integrate
from .special import SQRT_2_OVER_PI, phi, phic_inv

DEFAULT_CONFIG = QuadratureConfig()
TWO_OVER_PI = 2.0 / math.pi


def lq_norm(x, q):
    """``||x||_q`` with overflow-safe scaling; ``q = inf`` gives the max."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    m = x.max() if x.size else 0.0
    if m == 0.0:
        return 0.0
    if math.isinf(q):
        return float(m)
    return float(m * np.sum((x / m) ** q) ** (1.0 / q))


@dataclass(frozen=True)
class WeightVector:
    """Coordinate scales ``u``; negative inputs are replaced by their absolute values.

    ``q_norm`` records the normalisation the vector claims. When it is set
    the constructor checks ``||u||_q = 1`` to within 1e-12.
    """

    entries: tuple
    q_norm: float = None

    def __post_init__(self):
        arr = np.abs(np.asarray(self.entries, dtype=np.float64).reshape(-1))
        if arr.size == 0:
            raise DomainError("weight vector is empty")
        if not np.all(np.isfinite(arr)):
            raise DomainError("weights must be finite")
        if not np.any(arr > 0):
            raise DomainError("at least one weight must be positive")
        object.__setattr__(self, "entries", tuple(float(v) for v in arr))
        if self.q_norm is not None:
            q = float(self.q_norm)
            if not q > 0:
                raise DomainError(f"q_norm must be positive, got {q!r}")
            object.__setattr__(self, "q_norm", q)
            if abs(lq_norm(arr, q) - 1.0) > 1e-12:
                raise DomainError(f"weights are not normalised in l_{q:g}")

    @classmethod
    def normalized(cls, entries, q):
        arr = np.abs(np.asarray(entries, dtype=np.float64))
        nrm = lq_norm(arr, q)
        if not nrm > 0:
            raise DomainError("cannot normalise the zero vector")
        return cls(tuple(arr / nrm), q)

    @property
    def n(self):
        return len(self.entries)

    def array(self):
        return np.array(self.entries)

    def canonical(self):
        """Representative with entries sorted in decreasing order."""
        return WeightVector(tuple(sorted(self.entries, reverse=True)), self.q_norm)

    def positive(self):
        a = self.array()
        return a[a > 0]

    def scaled(self, alpha):
        return WeightVector(tuple(alpha * v for v in self.entries))


def as_weights(u):
    return u if isinstance(u, WeightVector) else WeightVector(tuple(u))


@dataclass
class ExpectationResult:
    value: float
    error_bound: float
    method: str
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.error_bound < 0 or not self.value >= 0:
            raise DomainError("expectation results must be nonnegative")


def _tail_mass_bound(T, scales, counts):
    # sum_j m_j int_T^inf (1 - phi(t/s_j)) dt, bounded term by term
    r = T / scales
    return float(np.sum(counts * scales * SQRT_2_OVER_PI * np.exp(-0.5 * r * r) / (1.0 + r * r)))


def truncation_point(scales, counts, eps):
    """Smallest ``T`` (to bisection accuracy) whose tail bound is ``<= eps``."""
    scales = np.asarray(scales, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    hi = float(scales.max())
    while _tail_mass_bound(hi, scales, counts) > eps:
        hi *= 2.0
    lo = 0.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _tail_mass_bound(mid, scales, counts) > eps:
            lo = mid
        else:
            hi = mid
    return hi


# multiples of each scale that seed panel edges; beyond 10 scales the factor
# phi(t/s) differs from 1 by less than 2e-23, so no feature is left to miss
_BP_MULTIPLES = np.array([0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0])


def _breakpoints(scales, T):
    bp = np.unique(np.outer(np.unique(scales), _BP_MULTIPLES).ravel())
    return bp[bp < T]


def supnorm_grouped(scales, counts, cfg=None):
    """Quadrature for scales ``scales[j]`` repeated ``counts[j]`` times."""
    cfg = cfg or DEFAULT_CONFIG
    scales = np.asarray(scales, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    T = truncation_point(scales, counts, cfg.tail_epsilon)
    tail = _tail_mass_bound(T, scales, counts)
    res = integrate(lambda t: kernels.supnorm_integrand(t, scales, counts), 0.0, T,
                    rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                    breakpoints=_breakpoints(scales, T))
    detail = {"truncation": T, "tail_bound": tail, "panels": res.panels,
              "converged": res.converged}
    return ExpectationResult(max(res.value, 0.0), res.error + tail, "quadrature", detail)


def expected_supnorm(u, cfg=None):
    """``E ||u (.) xi||_inf`` by quadrature; zero weights drop out."""
    w = as_weights(u).canonical().positive()
    scales, counts = np.unique(w, return_counts=True)
    return supnorm_grouped(scales, counts, cfg)


def expected_max_abs(k, cfg=None):
    """``E max(|xi_1|, ..., |xi_k|)`` for independent standard normals."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return supnorm_grouped([1.0], [float(k)], cfg)


def ek(k, cfg=None):
    """``E_k = k^(-1/2) E max_{i<=k} |xi_i|``."""
    return expected_max_abs(k, cfg).value / math.sqrt(k)


@dataclass
class EkTable:
    """Rows ``(k, E_k)`` for ``k = 1..n_max``; ``q`` is the normalising exponent."""

    q: float
    rows: list
    strictly_decreasing_from_2: bool
    min_margin: float
    first_two_gap: float
    asymptotic: list = field(default_factory=list)

    @property
    def values(self):
        return np.array([v for _, v in self.rows])


def build_ek_table(n_max, q, cfg=None):
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max!r}")
    n_max = int(n_max)
    raw = [expected_max_abs(k, cfg).value for k in range(1, n_max + 1)]
    rows = [(k, raw[k - 1] * k ** (-1.0 / q)) for k in range(1, n_max + 1)]
    vals = np.array([v for _, v in rows])
    diffs = vals[1:-1] - vals[2:]  # E_k - E_{k+1} for k >= 2
    margin = float(diffs.min()) if diffs.size else math.inf
    asym = [(k, vals[k - 1] * math.sqrt(2.0 * k / math.log(k))) for k in range(2, n_max + 1)]
    gap = float(abs(vals[0] - vals[1])) if n_max >= 2 else 0.0
    return EkTable(q, rows, bool(margin > 0), margin, gap, asym)


def ek_table(n_max, cfg=None):
    """Table of ``E_1..E_{n_max}`` with monotonicity metadata."""
    return build_ek_table(n_max, 2.0, cfg)


def median_supnorm(n):
    """Median of ``max_{i<=n} |xi_i|``: the root of ``phi(mu)^n = 1/2``."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    # 1 - 2^(-1/n) without cancellation
    return phic_inv(-math.expm1(-math.log(2.0) / n))


# derivative machinery --------------------------------------------------------

def _log_phi(t, w):
    # columns log phi(t / w_j), rows indexed by t
    a = (t[:, None] / w[None, :]).ravel()
    p, c = kernels.phi_phic(a)
    with np.errstate(divide="ignore"):
        out = np.where(c > 0.5, np.log(p), np.log1p(-c))
    return out.reshape(t.size, w.size)


def _logsumexp(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.squeeze(m, axis) + np.log(np.sum(np.exp(x - m), axis=axis))


def _cross_terms(t, w, drop):
    """log of ``sum_{k not in drop} e^{-t^2/2w_k^2} / w_k prod_{l not in drop, l != k} phi(t/w_l)``."""
    lp = _log_phi(t, w)
    keep = np.ones(w.size, dtype=bool)
    keep[list(drop)] = False
    lp = lp[:, keep]
    wk = w[keep]
    total = lp.sum(axis=1)
    terms = total[:, None] - lp - 0.5 * (t[:, None] / wk[None, :]) ** 2 - np.log(wk)[None, :]
    return _logsumexp(terms, axis=1)


def _index(u, i):
    n = len(u)
    if int(i) != i or not -n <= i < n:
        raise DomainError(f"index {i!r} out of range for n={n}")
    return int(i) % n


def _derivative_cutoff(ui, others, eps):
    # tail of e^{-t^2/2 ui^2} e^{-t^2/2 uk^2} / uk summed over k
    sig = 1.0 / np.sqrt(1.0 / ui**2 + 1.0 / others**2)

    def bound(T):
        return TWO_OVER_PI * float(np.sum(sig**2 / (others * T) * np.exp(-0.5 * (T / sig) ** 2)))

    T = float(sig.max())
    while bound(T) > eps:
        T *= 1.25
    return T, bound(T)


def partial_derivative(u, i, cfg=None):
    """``dE/du_i`` after integration by parts (``i`` is 0-based)."""
    cfg = cfg or DEFAULT_CONFIG
    w = as_weights(u).array()
    i = _index(w, i)
    if not w[i] > 0:
        raise DomainError("partial derivative requires u_i > 0")
    others = np.delete(w, i)
    others = others[others > 0]
    if others.size == 0:
        return SQRT_2_OVER_PI
    wp = np.concatenate([[w[i]], others])
    T, tail = _derivative_cutoff(w[i], others, cfg.tail_epsilon)

    def f(t):
        return TWO_OVER_PI * np.exp(-0.5 * (t / wp[0]) ** 2 + _cross_terms(t, wp, [0]))

    res = integrate(f, 0.0, T, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                    breakpoints=_breakpoints(wp, T))
    return res.value


def _residual_integral(wi, wj, rest, cfg):
    """``int (2/pi) S(t) [g(wi) phi(t/wj) - g(wj) phi(t/wi)] dt`` with ``g(u) = e^{-t^2/2u^2}/u``."""
    if rest.size == 0 or wi == wj:
        return 0.0, 0.0
    wp = np.concatenate([[wi, wj], rest])
    T, tail = _derivative_cutoff(min(wi, wj), rest, cfg.tail_epsilon)
    T = max(T, _derivative_cutoff(max(wi, wj), rest, cfg.tail_epsilon)[0])

    def f(t):
        s = _cross_terms(t, wp, [0, 1])
        lp = _log_phi(t, np.array([wi, wj]))
        a = -0.5 * (t / wi) ** 2 - math.log(wi) + lp[:, 1]
        b = -0.5 * (t / wj) ** 2 - math.log(wj) + lp[:, 0]
        with np.errstate(invalid="ignore"):
            diff = np.where(a >= b, np.exp(a) * -np.expm1(b - a), -np.exp(b) * -np.expm1(a - b))
        diff = np.where(np.isfinite(a) | np.isfinite(b), diff, 0.0)
        return TWO_OVER_PI * np.exp(s) * diff

    res = integrate(f, 0.0, T, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol * 1e-2,
                    breakpoints=_breakpoints(wp, T))
    return res.value, res.error + 2 * tail


def critical_point_residual(u, i, j, cfg=None):
    """``(1/u_i) dE/du_i - (1/u_j) dE/du_j`` as one integral (0-based indices).

    Sign convention: positive when ``u_i > u_j`` (the other coordinates held
    fixed), zero exactly when ``u_i == u_j`` and identically zero for fewer
    than three positive coordinates.
    """
    cfg = cfg or DEFAULT_CONFIG
    w = as_weights(u).array()
    i = _index(w, i)
    j = _index(w, j)
    if not (w[i] > 0 and w[j] > 0):
        raise DomainError("critical-point residual requires u_i, u_j > 0")
    if i == j:
        return 0.0
    rest = np.delete(w, [i, j])
    return _residual_integral(w[i], w[j], rest[rest > 0], cfg)[0]


# R(rho) family -----------------------------------------------------------------

def _check_rho(n, rho, allow_zero=True):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    top = 1.0 / math.sqrt(n + 1)
    lo_ok = rho >= 0 if allow_zero else rho > 0
    if not (lo_ok and rho <= top * (1 + 1e-15)):
        raise DomainError(f"rho must lie in [0, 1/sqrt(n+1)] = [0, {top:.17g}], got {rho!r}")


def rho_weights(n, rho):
    """``u(rho)``: ``n`` copies of ``sqrt((1 - rho^2)/n)`` followed by ``rho``."""
    _check_rho(n, rho)
    return WeightVector((math.sqrt((1.0 - rho * rho) / n),) * int(n) + (float(rho),))


def r_rho(n, rho, cfg=None):
    """``R(rho) = E ||u(rho) (.) xi||_inf``."""
    _check_rho(n, rho)
    a = math.sqrt((1.0 - rho * rho) / n)
    if rho == 0:
        return supnorm_grouped([a], [float(n)], cfg).value
    if rho == a:
        return supnorm_grouped([a], [float(n + 1)], cfg).value
    return supnorm_grouped([rho, a], [1.0, float(n)], cfg).value


def r_rho_derivative(n, rho, cfg=None):
    """``R'(rho)``; vanishes identically for ``n = 1``."""
    _check_rho(n, rho)
    cfg = cfg or DEFAULT_CONFIG
    if n == 1 or rho == 0:
        return 0.0
    a = math.sqrt((1.0 - rho * rho) / n)
    rest = np.full(int(n) - 1, a)
    return rho * _residual_integral(rho, a, rest, cfg)[0]


def rder_bracket(n, rho, t):
    """Bracket of the ``R'`` integrand, scaled to stay finite.

    With ``a = sqrt(n / (1 - rho^2))`` this is
    ``exp(-t^2/2rho^2 + a^2 t^2/2) phi(t a) - rho a phi(t/rho)``.
    """
    _check_rho(n, rho, allow_zero=False)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    a = math.sqrt(n / (1.0 - rho * rho))
    lead = math.exp(-0.5 * t * t * (1.0 / (rho * rho) - a * a)) * phi(t * a)
    return lead - rho * a * phi(t / rho)


def rder_integrand_sign(n, rho, t):
    """Sign of the full ``R'`` integrand, including the factor ``n - 1``."""
    if n == 1:
        _check_rho(n, rho, allow_zero=False)
        return 0
    b = rder_bracket(n, rho, t)
    a = math.sqrt(n / (1.0 - rho * rho))
    # rounding in the exponent t^2 (1/rho^2 - a^2) / 2 grows with t^2
    tol = 64.0 * np.finfo(float).eps * rho * a * (1.0 + t * t * (1.0 / (rho * rho) + a * a))
    if abs(b) <= tol:
        return 0
    return 1 if b > 0 else -1
