"""Expected norms of coordinate-scaled Gaussian vectors and cross-polytope bounds."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapabilityError,
    ConvergenceError,
    DetectionError,
    DomainError,
    GaussNormError,
)
from .geometry import (  # noqa: E402
    CrossPolytope,
    RadiiProfile,
    constant_c_table,
    kappa,
    lemma2_check,
    mean_width_lower_bound,
    v1_crosspolytope,
)
from .kernels import BACKEND  # noqa: E402
from .landscape import (  # noqa: E402
    PhaseReport,
    PQSpec,
    candidate_uqk,
    ekq,
    ekq_table,
    expected_pnorm,
    exploratory_scan_pinf_qgt2,
    optimize_on_lq_sphere,
    phase_thresholds_n2_p2,
    scan_landscape_n2,
)
from .montecarlo import (  # noqa: E402
    CovarianceSpec,
    McEstimate,
    McParams,
    mc_expected_norm,
    sample_correlated,
    sidak_check,
    theorem2_bounds_check,
)
from .quadrature import QuadratureConfig  # noqa: E402
from .special import EvalPoint, lemma1_f, lemma1_F, phi, phi_inv, phic, phic_inv  # noqa: E402
from .supnorm import (  # noqa: E402
    EkTable,
    ExpectationResult,
    WeightVector,
    critical_point_residual,
    ek,
    ek_table,
    expected_supnorm,
    median_supnorm,
    partial_derivative,
    r_rho,
    r_rho_derivative,
    rder_integrand_sign,
)
