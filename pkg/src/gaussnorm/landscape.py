"""Expected l_p norms on l_q spheres, critical-point scans and thresholds.

For two coordinates the expectation has a one-dimensional angular form.
Writing the standard planar Gaussian in polar coordinates, with radius
independent of angle and ``E R = sqrt(pi/2)``,

    E ||(u1 xi1, u2 xi2)||_p = sqrt(2/pi) * u1 * (1 + G(u2/u1)),
    G(r) = int_0^{pi/2} (||(sin psi, r cos psi)||_p - sin psi) dpsi,

which is evaluated in the variable ``log psi`` so that the excess,
concentrated near ``psi ~ r``, is resolved for ``r`` down to 1e-150.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import CapabilityError, ConvergenceError, DetectionError, DomainError
from .montecarlo import McParams, stream_key
from .quadrature import QuadratureConfig, integrate
from .special import SQRT_2_OVER_PI
from .supnorm import (
    DEFAULT_CONFIG,
    ExpectationResult,
    WeightVector,
    as_weights,
    build_ek_table,
    expected_max_abs,
    expected_supnorm,
    lq_norm,
)

HALF_PI = 0.5 * math.pi
LOG_HALF_PI = math.log(HALF_PI)
# lower end of the angular substitution, relative to r
_PSI_FLOOR = 1e-20
_ANGULAR_REL = 1e-13

# smallest t = u2/u1 represented on the quarter circle
T_MIN = 1e-150
S_MIN = math.log(T_MIN)


@dataclass(frozen=True)
class PQSpec:
    p: float
    q: float
    n: int

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (p > 1 or math.isinf(p)) or math.isnan(p):
            raise DomainError(f"p must exceed 1 (or be inf), got {self.p!r}")
        if not q > 0:
            raise DomainError(f"q must be positive, got {self.q!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "n", int(self.n))


# two-coordinate angular route ---------------------------------------------------

def _excess(a, b, p):
    """``||(a, b)||_p - a`` for ``a, b >= 0`` without cancellation."""
    if p == 2.0:
        return b * b / (np.hypot(a, b) + a)
    out = np.empty_like(a)
    big = a >= b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ab = a[big]
        out[big] = ab * np.expm1(np.log1p((b[big] / ab) ** p) / p)
        bs, as_ = b[~big], a[~big]
        out[~big] = bs * (1.0 + (as_ / bs) ** p) ** (1.0 / p) - as_
    return np.where(b > 0, out, 0.0)


def _slope_integrand(a, b, p):
    """``b * d/db ||(a, b)||_p = b^p / ||(a, b)||_p^(p-1)``."""
    with np.errstate(divide="ignore"):
        lr = np.log(a) - np.log(b)
    w = np.exp(-np.logaddexp(0.0, p * lr) / p)  # b / ||(a, b)||_p
    return b * w ** (p - 1.0)


def _angular(r, p, kernel, rel_tol):
    lo = math.log(r * _PSI_FLOOR)

    def f(y):
        psi = np.exp(y)
        return kernel(np.sin(psi), r * np.cos(psi), p) * psi

    res = integrate(f, lo, LOG_HALF_PI, rel_tol=rel_tol, abs_tol=0.0, initial_panels=16)
    # [0, psi_lo] contributes at most r * psi_lo to either integral
    return res.value + r * r * _PSI_FLOOR, res.error + r * r * _PSI_FLOOR


def angular_gain(r, p, rel_tol=_ANGULAR_REL):
    """``G(r)`` and an error estimate."""
    if r == 0:
        return 0.0, 0.0
    return _angular(float(r), float(p), _excess, rel_tol)


def angular_gain_slope(r, p, rel_tol=_ANGULAR_REL):
    """``r G'(r)`` and an error estimate."""
    if r == 0:
        return 0.0, 0.0
    return _angular(float(r), float(p), _slope_integrand, rel_tol)


def expected_pnorm_n2(u1, u2, p, rel_tol=_ANGULAR_REL):
    """``E ||(u1 xi1, u2 xi2)||_p`` for finite ``p`` by the angular route."""
    a, b = sorted((abs(float(u1)), abs(float(u2))), reverse=True)
    if a == 0:
        raise DomainError("at least one weight must be positive")
    g, err = angular_gain(b / a, p, rel_tol)
    v = SQRT_2_OVER_PI * a * (1.0 + g)
    return ExpectationResult(v, SQRT_2_OVER_PI * a * err + 4 * np.finfo(float).eps * v,
                             "quadrature", {"route": "angular"})


class _SampleBank:
    """Fixed standard normal samples for common-random-number objectives."""

    def __init__(self, n, samples, seed):
        key = stream_key(seed, 0xA11)
        self.z = kernels.gaussian_block(key, 0, samples, np.eye(n))

    def norms(self, u, p):
        x = np.abs(self.z * np.asarray(u)[None, :])
        if math.isinf(p):
            return x.max(axis=1)
        m = x.max(axis=1, keepdims=True)
        m = np.where(m > 0, m, 1.0)
        return m[:, 0] * np.sum((x / m) ** p, axis=1) ** (1.0 / p)


@lru_cache(maxsize=8)
def _bank(n, samples, seed):
    return _SampleBank(n, samples, seed)


def _mc_result(u, p, params):
    bank = _bank(len(u), params.samples, params.seed)
    v = bank.norms(u, p)
    mean = math.fsum(v) / v.size
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return ExpectationResult(mean, se, "monte-carlo",
                             {"samples": params.samples, "seed": params.seed})


def expected_pnorm(u, spec, method="auto", cfg=None, mc_params=None):
    """``E ||u (.) xi||_p``.

    ``method='auto'`` picks quadrature for ``p = inf``, the angular route
    for at most two positive weights, and Monte Carlo otherwise.
    """
    w = as_weights(u)
    if w.n != spec.n:
        raise DomainError(f"weight vector has {w.n} entries, spec says n={spec.n}")
    pos = w.canonical().positive()
    if method not in ("auto", "quadrature", "monte-carlo"):
        raise DomainError(f"unknown method {method!r}")
    if method == "monte-carlo":
        return _mc_result(w.array(), spec.p, mc_params or McParams(10**6))
    if math.isinf(spec.p):
        return expected_supnorm(w, cfg)
    if pos.size == 1:
        return ExpectationResult(SQRT_2_OVER_PI * pos[0], 0.0, "closed-form")
    if pos.size == 2:
        return expected_pnorm_n2(pos[0], pos[1], spec.p)
    if method == "quadrature":
        raise CapabilityError("quadrature is only available for p = inf or two coordinates")
    return _mc_result(w.array(), spec.p, mc_params or McParams(10**6))


# candidate family -----------------------------------------------------------------

def candidate_uqk(n, k, q):
    """``k`` entries ``k^(-1/q)`` followed by ``n - k`` zeros."""
    if int(n) != n or int(k) != k or not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k!r}, n={n!r}")
    if not q > 0:
        raise DomainError(f"q must be positive, got {q!r}")
    v = 1.0 if math.isinf(q) else float(k) ** (-1.0 / q)
    return WeightVector((v,) * int(k) + (0.0,) * int(n - k), float(q))


def ekq(k, q, cfg=None):
    """``E_{k,q} = k^(-1/q) E max_{i<=k} |xi_i|``."""
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q!r}")
    return expected_max_abs(k, cfg).value * float(k) ** (-1.0 / q)


def ekq_table(n_max, q, cfg=None):
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q!r}")
    return build_ek_table(n_max, q, cfg)


# optimisation on the l_q sphere ------------------------------------------------------

TIGHT_CONFIG = QuadratureConfig(1e-13, 1e-14, 1e-15)
FD_STEP = 1e-5
MAX_ITER = 10_000
RESIDUAL_TOL = 1e-6


def _objective(spec, cfg, mc_samples, mc_seed):
    if math.isinf(spec.p):
        return lambda u: expected_supnorm(np.abs(u), cfg).value
    if spec.n == 2:
        return lambda u: expected_pnorm_n2(u[0], u[1], spec.p).value
    bank = _bank(spec.n, mc_samples, mc_seed)
    return lambda u: math.fsum(bank.norms(np.abs(u), spec.p)) / mc_samples


def _normalize(u, q):
    u = np.abs(u)
    return u / lq_norm(u, q)


def _projected_gradient(f, u, q, h):
    n = u.size
    g = np.zeros(n)
    for i in range(n):
        if u[i] == 0:
            continue  # even extension: derivative across a zero vanishes
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(u + e) - f(np.abs(u - e))) / (2 * h)
    supp = u > 0
    nu = np.where(supp, u ** (q - 1.0), 0.0)
    pg = g - (g @ nu) / (nu @ nu) * nu
    return np.where(supp, pg, 0.0)


@dataclass
class _Run:
    u: np.ndarray
    value: float
    residual: float
    iterations: int
    converged: bool
    start: str


def _descend(f, u0, q, sense, tol, max_iter, h, label):
    u = _normalize(u0, q)
    fu = f(u)
    step = 1.0
    it = 0
    pg = _projected_gradient(f, u, q, h)
    res = float(np.linalg.norm(pg))
    while res >= tol and it < max_iter:
        it += 1
        d = sense * pg
        accepted = False
        while step > 1e-16:
            v = _normalize(np.maximum(u + step * d, 0.0), q)
            fv = f(v)
            if sense * (fv - fu) >= 1e-4 * step * res * res:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        new_pg = _projected_gradient(f, v, q, h)
        # Barzilai-Borwein trial step for the next line search
        s_k = v - u
        curv = -sense * float(s_k @ (new_pg - pg))
        step = min(float(s_k @ s_k) / curv, 1e3) if curv > 0 else min(step * 2.0, 1e3)
        u, fu, pg = v, fv, new_pg
        res = float(np.linalg.norm(pg))
    return _Run(u, fu, res, it, res < tol, label)


def optimize_on_lq_sphere(spec, mode="min", starts=8, seed=0, cfg=None,
                          candidates=True, mc_samples=200_000, tol=RESIDUAL_TOL,
                          max_iter=MAX_ITER):
    """Minimise or maximise ``E ||u (.) xi||_p`` over ``||u||_q = 1``.

    Multi-start projected gradient ascent/descent with central finite
    differences. Starts are the candidate family ``u_q^k`` (when
    ``candidates``) followed by ``starts`` random points, each drawn from the
    sub-seed ``(seed, j)``.
    """
    if mode not in ("min", "max"):
        raise DomainError(f"mode must be 'min' or 'max', got {mode!r}")
    if int(starts) != starts or starts < 0 or (starts == 0 and not candidates):
        raise DomainError("need at least one start")
    if math.isinf(spec.q):
        raise CapabilityError("the l_inf sphere is not smooth; use candidate values instead")
    cfg = cfg or TIGHT_CONFIG
    sense = -1.0 if mode == "min" else 1.0
    n, q = spec.n, spec.q

    if n == 2 and math.isinf(spec.p) and q == 2.0:
        u = candidate_uqk(2, 1, q)
        val = expected_supnorm(u, cfg)
        val.detail.update(constant_landscape=True, residual=0.0, converged=True,
                          iterations=0, start="constant")
        return u, val

    f = _objective(spec, cfg, mc_samples, seed)
    inits = []
    if candidates:
        inits += [(candidate_uqk(n, k, q).array(), f"candidate k={k}") for k in range(1, n + 1)]
    for j in range(int(starts)):
        rng = np.random.default_rng([int(seed), j])
        inits.append((np.abs(rng.standard_normal(n)) + 1e-3, f"random #{j}"))

    runs = [_descend(f, u0, q, sense, tol, max_iter, FD_STEP, label) for u0, label in inits]
    best = max(runs, key=lambda r: sense * r.value)
    if not best.converged:
        raise ConvergenceError(
            f"best start ({best.start}) stopped with residual {best.residual:.3g} "
            f"after {best.iterations} iterations", best=best)
    u = WeightVector(tuple(best.u), q)
    res = expected_pnorm(u, spec, cfg=cfg, mc_params=McParams(mc_samples, seed))
    res.detail.update(constant_landscape=False, residual=best.residual,
                      converged=True, iterations=best.iterations, start=best.start,
                      runs=[{"start": r.start, "value": r.value, "residual": r.residual,
                             "converged": r.converged} for r in runs])
    return u, res


# n = 2 landscape ---------------------------------------------------------------------

class _Profile:
    """``G``, ``t G'`` on demand for one ``p``, memoised by ``s = log t``."""

    def __init__(self, p):
        self.p = float(p)
        self._cache = {}

    def at(self, s):
        s = float(s)
        hit = self._cache.get(s)
        if hit is None:
            t = math.exp(s)
            g = angular_gain(t, self.p)[0]
            tg = angular_gain_slope(t, self.p)[0]
            hit = (g, tg)
            self._cache[s] = hit
        return hit

    def psi(self, s, q):
        """Log-ratio whose sign is the sign of ``dD/ds`` on the l_q circle."""
        g, tg = self.at(s)
        qs = q * s
        return math.log(tg) - math.log1p(g) - (qs - _log1pexp(qs))

    def value(self, s, q):
        """``E ||u(t)|| - E ||(1, 0)||`` for ``u(t) = (1, t)/||(1, t)||_q``."""
        g, _ = self.at(s)
        x = _log1pexp(q * s) / q
        nrm = math.exp(-x)
        return SQRT_2_OVER_PI * (nrm * g + math.expm1(-x))

    def gamma(self, s, h=0.5):
        """Local growth order ``d log G / d s``."""
        return (math.log(self.at(s + h)[0]) - math.log(self.at(s - h)[0])) / (2 * h)


def _log1pexp(x):
    return x + math.log1p(math.exp(-x)) if x > 0 else math.log1p(math.exp(x))


@lru_cache(maxsize=32)
def _profile(p):
    return _Profile(p)


def _point(t, q):
    nrm = 1.0 / (1.0 + t**q) ** (1.0 / q) if t <= 1 else 1.0 / (1.0 + t ** (-q)) ** (1.0 / q) / t
    return (nrm, nrm * t)


@dataclass
class CriticalPoint:
    t: float
    location: tuple
    kind: str
    value: float
    residual: float
    resolved: bool = True
    gap: float = 0.0  # value minus the axis value, without cancellation


@dataclass
class ScanRow:
    p: float
    q: float
    points: list
    endpoint_order: float

    @property
    def n_min(self):
        return sum(c.kind == "min" for c in self.points)

    @property
    def n_max(self):
        return sum(c.kind == "max" for c in self.points)

    @property
    def interior_minima(self):
        """Minima strictly inside the arc, the uniform point included."""
        return [c for c in self.points if c.kind == "min" and 0 < c.t < math.inf]

    def kind_at(self, where):
        t = {"axis": 0.0, "uniform": 1.0}[where]
        return next(c.kind for c in self.points if c.t == t)

    def global_min(self):
        return min(self.points, key=lambda c: c.gap)

    def global_max(self):
        return max(self.points, key=lambda c: c.gap)


def _s_grid(grid_size):
    m = grid_size // 2
    coarse = np.linspace(S_MIN, -1.0, grid_size - m, endpoint=False)
    fine = -np.geomspace(1.0, 1e-3, m)
    return np.concatenate([coarse, fine])


def _refine(prof, q, a, b, fa):
    for _ in range(60):
        mid = 0.5 * (a + b)
        fm = prof.psi(mid, q)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
        if b - a < 1e-11 * max(1.0, abs(a)):
            break
    return 0.5 * (a + b)


def _slope_scale(prof, s, q):
    # positive factor turning expm1(psi) into dD/ds
    g, _ = prof.at(s)
    qs = q * s
    return SQRT_2_OVER_PI * math.exp(-_log1pexp(qs) / q) * (1.0 + g) * math.exp(qs - _log1pexp(qs))


def _uniform_curvature(prof, q, h=0.02):
    """``d psi / d s`` at the uniform point (same sign as ``D''(0)``)."""
    def cd(hh):
        return (prof.psi(hh, q) - prof.psi(-hh, q)) / (2 * hh)
    return (4 * cd(h / 2) - cd(h)) / 3


def scan_landscape_n2(p, q, grid_size=256, cfg=None):
    """Critical points of ``E ||u (.) xi||_p`` on the l_q quarter circle (n = 2).

    Points are reported on the arc from ``(1, 0)`` to ``(0, 1)``; the half
    beyond the uniform point mirrors the first half.
    """
    if grid_size < 64:
        raise DomainError("grid_size must be at least 64")
    spec = PQSpec(p, q, 2)
    if math.isinf(spec.p):
        raise CapabilityError("the n=2 scan uses the angular route and needs finite p")
    prof = _profile(spec.p)
    q = spec.q
    grid = _s_grid(grid_size)
    psi = np.array([prof.psi(s, q) for s in grid])

    def val(t):
        return expected_pnorm_n2(*_point(t, q), spec.p).value

    half = []
    for k in range(grid.size - 1):
        if (psi[k] > 0) != (psi[k + 1] > 0) and psi[k] != 0:
            s = _refine(prof, q, grid[k], grid[k + 1], psi[k])
            h = 1e-4 * max(1.0, abs(s))
            second = prof.psi(s + h, q) - prof.psi(s - h, q)
            kind = "min" if second > 0 else "max"
            resid = abs(_slope_scale(prof, s, q) * math.expm1(prof.psi(s, q)))
            t = math.exp(s)
            half.append(CriticalPoint(t, _point(t, q), kind, val(t), resid,
                                      gap=prof.value(s, q)))

    gamma = prof.gamma(S_MIN)
    axis_kind = "max" if q < gamma else "min"
    edge_up = psi[0] > 0
    if (axis_kind == "max") == edge_up:
        # D moves away from the axis value in the wrong direction at the grid
        # edge: an extremum sits closer to the axis than T_MIN
        kind = "min" if edge_up else "max"
        half.insert(0, CriticalPoint(T_MIN, _point(T_MIN, q), kind, val(T_MIN), 0.0,
                                     resolved=False, gap=prof.value(S_MIN, q)))
    uni = "min" if _uniform_curvature(prof, q) > 0 else "max"

    axis = CriticalPoint(0.0, (1.0, 0.0), axis_kind, SQRT_2_OVER_PI, 0.0)
    centre = CriticalPoint(1.0, _point(1.0, q), uni, val(1.0), 0.0, gap=prof.value(0.0, q))
    mirror = [CriticalPoint(1.0 / c.t, c.location[::-1], c.kind, c.value, c.residual,
                            c.resolved, c.gap) for c in reversed(half)]
    far = CriticalPoint(math.inf, (0.0, 1.0), axis_kind, SQRT_2_OVER_PI, 0.0)
    return ScanRow(spec.p, q, [axis] + half + [centre] + mirror + [far], gamma)


def _bisect_sign(fn, lo, hi, tol=1e-12, name="threshold"):
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo, (lo, lo)
    if fhi == 0:
        return hi, (hi, hi)
    if (flo > 0) == (fhi > 0):
        raise DetectionError(f"no sign change for {name} in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), (lo, hi)


def detect_thresholds(p=2.0, lo=1.0, hi=3.0):
    """``q_L``, ``q_M``, ``q_U`` for ``n = 2`` with their final brackets.

    * ``q_L``: the uniform point changes from minimum to maximum.
    * ``q_M``: the uniform value crosses the axis value ``sqrt(2/pi)``.
    * ``q_U``: the axis point changes from maximum to minimum.
    """
    prof = _profile(float(p))
    q_l, b_l = _bisect_sign(lambda q: _uniform_curvature(prof, q), lo, hi, name="q_L")
    q_m, b_m = _bisect_sign(lambda q: prof.value(0.0, q), lo, hi, name="q_M")
    gamma = prof.gamma(S_MIN)
    q_u, b_u = _bisect_sign(lambda q: q - gamma, lo, hi, name="q_U")
    return {"q_L": (q_l, b_l), "q_M": (q_m, b_m), "q_U": (q_u, b_u)}


def phase_thresholds_n2_p2(cfg=None):
    """``(q_L, q_M, q_U)`` for ``n = 2``, ``p = 2``."""
    d = detect_thresholds(2.0)
    return d["q_L"][0], d["q_M"][0], d["q_U"][0]


@dataclass
class PhaseReport:
    p: float
    q_values: list
    rows: list
    thresholds: dict = field(default_factory=dict)


def phase_report(p=2.0, q_values=None, grid_size=256):
    qs = list(np.round(np.linspace(1.0, 3.0, 21), 10) if q_values is None else q_values)
    rows = [scan_landscape_n2(p, float(q), grid_size) for q in qs]
    return PhaseReport(float(p), [float(q) for q in qs], rows, detect_thresholds(p))


# p = inf, q > 2 exploration -----------------------------------------------------------

def _equal_nonzero(u, tol=1e-6):
    nz = u[u > tol]
    return bool(nz.size and nz.max() - nz.min() <= tol)


def exploratory_scan_pinf_qgt2(n, q_grid, cfg=None, starts=2, seed=0, optimize=True):
    """Candidate values and optimiser extrema for ``p = inf``, ``q > 2``.

    Purely descriptive: nothing here is asserted.
    """
    cfg = cfg or DEFAULT_CONFIG
    out = []
    for q in q_grid:
        q = float(q)
        if not q > 2:
            raise DomainError(f"exploratory scan needs q > 2, got {q!r}")
        cands = [(k, expected_supnorm(candidate_uqk(n, k, q), cfg).value) for k in range(1, n + 1)]
        row = {
            "q": q,
            "candidates": cands,
            "candidate_argmin_k": min(cands, key=lambda c: c[1])[0],
            "candidate_argmax_k": max(cands, key=lambda c: c[1])[0],
            "uniform_exceeds_axis": cands[-1][1] > cands[0][1],
        }
        if optimize and not math.isinf(q):
            spec = PQSpec(math.inf, q, n)
            found = {}
            for mode in ("min", "max"):
                try:
                    u, res = optimize_on_lq_sphere(spec, mode, starts, seed)
                    found[mode] = {"u": list(u.entries), "value": res.value, "converged": True,
                                   "equal_nonzero": _equal_nonzero(u.array())}
                except ConvergenceError as exc:
                    b = exc.best
                    found[mode] = {"u": list(b.u), "value": b.value, "converged": False,
                                   "equal_nonzero": _equal_nonzero(b.u)}
            row["extrema"] = found
            row["all_extrema_equal_nonzero"] = all(v["equal_nonzero"] for v in found.values())
        out.append(row)
    return out
