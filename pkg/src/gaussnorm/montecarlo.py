"""Reproducible Monte Carlo for centred Gaussian vectors.

Draws come from a counter-based generator: sample row ``r`` of stream
``key`` always consumes counters ``r*m .. r*m + m - 1``. Rows are grouped
in fixed blocks of ``BLOCK`` rows, and substreams only decide which worker
evaluates which block, so any thread count gives bit-identical results.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .special import SQRT_2_OVER_PI, phi

BLOCK = 65536
_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

SYMMETRY_TOL = 1e-12
EIGEN_TOL = 1e-10
TRACE_TOL = 1e-10


def _splitmix(z):
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed, stream=0):
    """64-bit generator key for ``(seed, stream)``."""
    return _splitmix(_splitmix(int(seed) & _MASK) ^ (int(stream) & _MASK))


class CovarianceSpec:
    """Symmetric PSD matrix with unit trace, plus a factor ``L`` with ``L L^T = cov``.

    Eigenvalues in ``[-1e-10, 0)`` are clipped to zero, so rank-deficient
    matrices are represented exactly by a thin factor.
    """

    def __init__(self, matrix, check_trace=True):
        a = np.array(matrix, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"covariance must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("covariance entries must be finite")
        if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
            raise DomainError("covariance is not symmetric within 1e-12")
        if check_trace and abs(np.trace(a) - 1.0) > TRACE_TOL:
            raise DomainError(f"trace must be 1 within {TRACE_TOL:g}, got {float(np.trace(a))!r}")
        a = 0.5 * (a + a.T)
        lam, vec = np.linalg.eigh(a)
        if lam.min() < -EIGEN_TOL:
            raise DomainError(f"covariance has eigenvalue {lam.min():.3g} < -1e-10")
        lam = np.clip(lam, 0.0, None)
        # drop directions that are zero up to rounding
        keep = lam > a.shape[0] * np.finfo(float).eps * max(lam.max(), 0.0)
        self.matrix = a
        self.n = a.shape[0]
        self.eigenvalues = lam
        self.factor = np.ascontiguousarray(vec[:, keep] * np.sqrt(lam[keep]))
        self.rank = int(keep.sum())

    @property
    def scales(self):
        """Marginal standard deviations ``sqrt(cov_ii)``."""
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))

    @classmethod
    def diagonal(cls, variances):
        return cls(np.diag(np.asarray(variances, dtype=np.float64)))

    @classmethod
    def isotropic(cls, n):
        return cls(np.eye(n) / n)

    @classmethod
    def equicorrelated(cls, n, rho):
        return cls(((1.0 - rho) * np.eye(n) + rho * np.ones((n, n))) / n)

    @classmethod
    def rank_one(cls, v):
        v = np.asarray(v, dtype=np.float64)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v))


@dataclass(frozen=True)
class McParams:
    samples: int
    seed: int = 0
    substreams: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise DomainError("samples must be a positive integer")
        if int(self.substreams) != self.substreams or self.substreams < 1:
            raise DomainError("substreams must be a positive integer")


@dataclass
class McEstimate:
    mean: float
    std_error: float
    samples: int


def _blocks(total):
    return [(s, min(BLOCK, total - s)) for s in range(0, total, BLOCK)]


def _map_blocks(fn, total, substreams):
    """Apply ``fn(start, size)`` to every block; results come back in block order."""
    blocks = _blocks(total)
    if substreams == 1 or len(blocks) == 1:
        return [fn(s, m) for s, m in blocks]
    lanes = [blocks[k::substreams] for k in range(substreams)]

    def run(lane):
        return [fn(s, m) for s, m in lane]

    with ThreadPoolExecutor(max_workers=substreams) as pool:
        done = list(pool.map(run, lanes))
    out = [None] * len(blocks)
    for k, res in enumerate(done):
        out[k::substreams] = res
    return out


def sample_correlated(cov, params, stream=0):
    """Materialise ``params.samples`` rows of ``X ~ N(0, cov)``."""
    key = stream_key(params.seed, stream)
    parts = _map_blocks(lambda s, m: kernels.gaussian_block(key, s, m, cov.factor),
                        params.samples, params.substreams)
    return np.concatenate(parts, axis=0)


def _summarise(parts, total):
    # shift by the first sample so the second moment carries no cancellation
    shift = float(parts[0][0])
    s1 = math.fsum(math.fsum(p - shift) for p in parts)
    s2 = math.fsum(math.fsum((p - shift) ** 2) for p in parts)
    mean = shift + s1 / total
    var = (s2 - s1 * s1 / total) / (total - 1) if total > 1 else 0.0
    return McEstimate(mean, math.sqrt(max(var, 0.0) / total), total)


def mc_norm_samples(cov, p, params, stream=0):
    key = stream_key(params.seed, stream)
    p = float(p)
    return _map_blocks(lambda s, m: kernels.norm_block(key, s, m, cov.factor, p),
                       params.samples, params.substreams)


def mc_expected_norm(cov, p, params, stream=0):
    """Sample mean of ``||X||_p`` with its standard error."""
    if not (p >= 1):
        raise DomainError(f"p must be >= 1 or inf, got {p!r}")
    return _summarise(mc_norm_samples(cov, p, params, stream), params.samples)


def mc_scaled_norm(u, p, params, stream=0):
    """``E ||u (.) xi||_p`` by Monte Carlo for independent coordinates."""
    u = np.abs(np.asarray(u, dtype=np.float64))
    cov = CovarianceSpec(np.diag(u * u), check_trace=False)
    return mc_expected_norm(cov, p, params, stream)


@dataclass
class SidakReport:
    t: np.ndarray
    empirical: np.ndarray
    product: np.ndarray
    margin: np.ndarray
    std_error: np.ndarray
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def min_z(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.std_error > 0, self.margin / self.std_error, 0.0)
        return float(z.min())


DEFAULT_T_GRID = np.linspace(0.05, 2.5, 20)


def sidak_check(cov, t_grid=None, params=None, stream=0, z=3.0):
    """Compare ``P(||X||_inf <= t)`` with ``prod_i phi(t / sqrt(cov_ii))``."""
    t = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=np.float64)
    if np.any(t <= 0):
        raise DomainError("t grid must be positive")
    params = params or McParams(10**6)
    key = stream_key(params.seed, stream)

    def count(s, m):
        x = np.sort(kernels.norm_block(key, s, m, cov.factor, math.inf))
        return np.searchsorted(x, t, side="right")

    hits = np.sum(_map_blocks(count, params.samples, params.substreams), axis=0)
    emp = hits / params.samples
    sc = cov.scales
    prod = np.ones_like(t)
    for s in sc[sc > 0]:
        prod = prod * phi(t / s)
    se = np.sqrt(prod * (1.0 - prod) / params.samples)
    margin = emp - prod
    bad = [int(k) for k in np.nonzero(margin < -z * se)[0]]
    return SidakReport(t, emp, prod, margin, se, bad)


@dataclass
class BoundsVerdict:
    estimate: McEstimate
    lower: float
    upper: float
    passed: bool


def theorem2_bounds_check(cov, params=None, stream=0, z=3.0):
    """Check ``sqrt(2/(n pi)) - z se <= E||X||_inf <= sqrt(2/pi) + z se``."""
    params = params or McParams(10**5)
    est = mc_expected_norm(cov, math.inf, params, stream)
    lo = SQRT_2_OVER_PI / math.sqrt(cov.n)
    hi = SQRT_2_OVER_PI
    ok = lo - z * est.std_error <= est.mean <= hi + z * est.std_error
    return BoundsVerdict(est, lo, hi, bool(ok))


def random_trace_one_psd(n, seed, index=0, rank=None):
    """Random ``G G^T / tr`` with ``G`` an ``n x rank`` Gaussian matrix."""
    rng = np.random.default_rng([int(seed) & _MASK, int(n), int(index)])
    r = int(rng.integers(1, n + 1)) if rank is None else int(rank)
    g = rng.standard_normal((n, r))
    a = g @ g.T
    a = 0.5 * (a + a.T)
    return CovarianceSpec(a / np.trace(a))


def sidak_battery(seed=0):
    """Named covariance matrices used for the Sidak check."""
    out = [("diagonal", CovarianceSpec.diagonal([0.4, 0.3, 0.2, 0.1]))]
    for rho in (0.2, 0.5, 0.8):
        out.append((f"equicorrelated rho={rho}", CovarianceSpec.equicorrelated(4, rho)))
    out.append(("rank-1 n=5", CovarianceSpec.rank_one([1.0, 0.8, 0.6, 0.4, 0.2])))
    rng = np.random.default_rng([int(seed) & _MASK, 0xB1])
    for j in range(10):
        n = int(rng.integers(2, 7))
        out.append((f"random psd #{j} n={n}", random_trace_one_psd(n, seed, 1000 + j)))
    return out
