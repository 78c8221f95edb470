"""Bell-inequality search and certification from coincidence-count data.

Given raw counts from a bipartite experiment, the package finds the Bell
functional maximizing the error-adjusted violation ratio
R = (Q - dQ + dm)/(C + dm), decides whether the data admits any
local-hidden-variable model, and computes the detection efficiencies at
which a violation would survive inefficient detectors.
"""

__version__ = "0.1.0"

from .core import (
    INGEST_TOL,
    INTERNAL_TOL,
    Behavior,
    BellFunctional,
    NsResidual,
    Scenario,
    absorb_marginals,
    evaluate,
    marginals,
    ns_residual,
    rescale,
    uniform_behavior,
)
from .errors import (
    BellgapError,
    CapacityError,
    ConvergenceError,
    DegenerateDataError,
    DegenerateObjectiveError,
    DomainError,
    InfeasibleEfficiencyError,
    InfiniteDivergenceError,
    MeasurementError,
    NoViolationError,
    NumericalError,
    SchemaError,
    ShapeMismatchError,
    UnsupportedScenarioError,
    ValidationError,
)
from .lhv import (
    DeterministicStrategy,
    LhvResult,
    lhv_bound,
    lhv_subgradient,
    make_joint_bound_oracle,
    strategy_behavior,
)
from .loophole import (
    EFFICIENCY_MODES,
    CanonicalFunctional,
    EfficiencyResult,
    canonical_lhv_bound,
    canonical_terms,
    canonical_value,
    canonicalize,
    critical_efficiency,
)
from .optimize import (
    ENGINES,
    OptimizationResult,
    OptimizerConfig,
    absorb_into_box,
    maximize_r,
    objective_r,
    r_value,
    sdn,
)
from .quantum import (
    Measurement,
    TiltedRealization,
    TwoQubitState,
    alpha_for_concurrence,
    born_behavior,
    concurrence,
    tilted_behavior,
    tilted_constants,
    tilted_functional,
    tilted_realization,
)
from .stats import (
    CountTable,
    ErrorReport,
    error_propagation,
    frequencies,
    kl_divergence,
    ns_project,
    poisson_sample,
)

__all__ = [
    "__version__",
    "INGEST_TOL",
    "INTERNAL_TOL",
    "Behavior",
    "BellFunctional",
    "NsResidual",
    "Scenario",
    "absorb_marginals",
    "evaluate",
    "marginals",
    "ns_residual",
    "rescale",
    "uniform_behavior",
    "BellgapError",
    "CapacityError",
    "ConvergenceError",
    "DegenerateDataError",
    "DegenerateObjectiveError",
    "DomainError",
    "InfeasibleEfficiencyError",
    "InfiniteDivergenceError",
    "MeasurementError",
    "NoViolationError",
    "NumericalError",
    "SchemaError",
    "ShapeMismatchError",
    "UnsupportedScenarioError",
    "ValidationError",
    "DeterministicStrategy",
    "LhvResult",
    "lhv_bound",
    "lhv_subgradient",
    "make_joint_bound_oracle",
    "strategy_behavior",
    "EFFICIENCY_MODES",
    "CanonicalFunctional",
    "EfficiencyResult",
    "canonical_lhv_bound",
    "canonical_terms",
    "canonical_value",
    "canonicalize",
    "critical_efficiency",
    "ENGINES",
    "OptimizationResult",
    "OptimizerConfig",
    "absorb_into_box",
    "maximize_r",
    "objective_r",
    "r_value",
    "sdn",
    "Measurement",
    "TiltedRealization",
    "TwoQubitState",
    "alpha_for_concurrence",
    "born_behavior",
    "concurrence",
    "tilted_behavior",
    "tilted_constants",
    "tilted_functional",
    "tilted_realization",
    "CountTable",
    "ErrorReport",
    "error_propagation",
    "frequencies",
    "kl_divergence",
    "ns_project",
    "poisson_sample",
]
