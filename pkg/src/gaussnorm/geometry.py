"""First intrinsic volume of orthogonal cross-polytopes and the mean-width bound."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .quadrature import integrate
from .special import SQRT_2_OVER_PI, phi, phic
from .supnorm import DEFAULT_CONFIG, ek, expected_supnorm, median_supnorm, truncation_point

SQRT_2PI = math.sqrt(2.0 * math.pi)
COROLLARY_CONSTANT = 1.74


def kappa(n):
    """Volume ``pi^(n/2) / Gamma(1 + n/2)`` of the Euclidean unit ball in R^n."""
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n > 100:
        return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(1 + 0.5 * n))
    k = 1.0 if n % 2 == 0 else 2.0
    for m in range(2 + n % 2, n + 1, 2):
        k *= 2.0 * math.pi / m
    return k


def _positive_vector(values, name):
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise DomainError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise DomainError(f"{name} must be finite and positive")
    return tuple(float(v) for v in a)


@dataclass(frozen=True)
class CrossPolytope:
    """``conv{+-lambda_i e_i}`` with semi-axes ``lambda_i > 0``."""

    semi_axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "semi_axes", _positive_vector(self.semi_axes, "semi_axes"))

    @property
    def n(self):
        return len(self.semi_axes)


@dataclass(frozen=True)
class RadiiProfile:
    """Successive inner radii ``r_1 >= r_2 >= ... > 0``.

    Pass ``allow_unsorted=True`` to accept an arbitrary positive profile.
    """

    inner_radii: tuple
    allow_unsorted: bool = False

    def __post_init__(self):
        r = _positive_vector(self.inner_radii, "inner_radii")
        if not self.allow_unsorted:
            bad = [i for i in range(len(r) - 1) if r[i + 1] > r[i]]
            if bad:
                i = bad[0]
                raise DomainError(
                    f"inner radii must be nonincreasing: r[{i + 1}]={r[i + 1]!r} > r[{i}]={r[i]!r}"
                    " (set allow_unsorted to override)")
        object.__setattr__(self, "inner_radii", r)

    @property
    def n(self):
        return len(self.inner_radii)


def v1_crosspolytope(cp, cfg=None):
    """``V_1(C_n(lambda)) = sqrt(2 pi) E ||lambda (.) xi||_inf``."""
    if not isinstance(cp, CrossPolytope):
        cp = CrossPolytope(tuple(cp))
    return SQRT_2PI * expected_supnorm(cp.semi_axes, cfg).value


@dataclass
class MeanWidthBound:
    n: int
    radii_norm: float
    e_n: float
    bound_exact: float
    bound_corollary: float  # None when n = 1
    corollary_defined: bool
    v1_cross_polytope: float


def mean_width_lower_bound(radii, cfg=None):
    """Lower bounds on ``V_1(K)`` from the successive inner radii of ``K``.

    ``bound_exact = sqrt(2 pi) E_n ||r||_2`` and, for ``n >= 2``,
    ``bound_corollary = 1.74 sqrt(log n / n) ||r||_2``. Also reports
    ``V_1(C_n(r))``, which sits between ``V_1(K)`` and ``bound_exact``.
    """
    if not isinstance(radii, RadiiProfile):
        radii = RadiiProfile(tuple(radii))
    r = np.array(radii.inner_radii)
    n = r.size
    nrm = float(np.linalg.norm(r))
    e_n = ek(n, cfg)
    exact = SQRT_2PI * e_n * nrm
    cor = COROLLARY_CONSTANT * math.sqrt(math.log(n) / n) * nrm if n >= 2 else None
    return MeanWidthBound(n, nrm, e_n, exact, cor, n >= 2,
                          v1_crosspolytope(CrossPolytope(tuple(r)), cfg))


@dataclass
class ConstantTable:
    rows: list  # (n, c_n, median-route constant)
    argmin_n: int
    min_c: float
    largest_n: int
    c_at_largest: float
    below_threshold: list = field(default_factory=list)

    @property
    def all_above(self):
        return not self.below_threshold


def c_constant(n, cfg=None):
    """``c_n = sqrt(2 pi n / log n) E_n``."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    return math.sqrt(2.0 * math.pi * n / math.log(n)) * ek(n, cfg)


def median_constant(n):
    """Constant from ``E max_i |xi_i| >= mu_n / 2``: ``sqrt(pi/2) mu_n / sqrt(log n)``."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    return math.sqrt(0.5 * math.pi) * median_supnorm(n) / math.sqrt(math.log(n))


def constant_c_table(n_list, cfg=None, threshold=COROLLARY_CONSTANT):
    ns = [int(n) for n in n_list]
    if not ns:
        raise DomainError("n_list must be nonempty")
    rows = [(n, c_constant(n, cfg), median_constant(n)) for n in ns]
    best = min(rows, key=lambda r: r[1])
    top = max(rows, key=lambda r: r[0])
    below = [n for n, c, _ in rows if not c >= threshold]
    return ConstantTable(rows, best[0], best[1], top[0], top[1], below)


@dataclass
class TailComparison:
    c: float
    lhs: float
    rhs: float
    identity_residual: float
    holds: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.identity_residual, self.holds))


def _tail_quad(f, c, scale, cfg):
    # tail of either integrand beyond T is at most 2 * int_T^inf (1 - phi(t/scale))
    T = truncation_point(np.array([scale]), np.array([2.0]), cfg.tail_epsilon)
    if T <= c:
        return 0.0
    return integrate(f, c, T, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol).value


def lemma2_check(c, cfg=None):
    """Compare ``c + int_c^inf (1 - phi(sqrt2 t)^2) dt`` with ``c + int_c^inf (1 - phi(t)) dt``.

    The right side is also checked against its closed form
    ``sqrt(2/pi) exp(-c^2/2) + c phi(c)``.
    """
    cfg = cfg or DEFAULT_CONFIG
    c = float(c)
    if not (c >= 0 and math.isfinite(c)):
        raise DomainError(f"c must be finite and >= 0, got {c!r}")
    r2 = math.sqrt(2.0)

    def left(t):
        pc = phic(r2 * t)
        return pc * (2.0 - pc)

    lhs = c + _tail_quad(left, c, 1.0 / r2, cfg)
    rhs = c + _tail_quad(phic, c, 1.0, cfg)
    closed = SQRT_2_OVER_PI * math.exp(-0.5 * c * c) + c * phi(c)
    resid = abs(rhs - closed)
    return TailComparison(c, lhs, rhs, resid, bool(lhs <= rhs + 1e-10))
