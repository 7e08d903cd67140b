"""Stability analysis of Bayes-optimal acts under banded prior perturbations.

The package measures how far a reference prior can move before an optimal
act loses its optimality (robustness radius), how far it must move before a
suboptimal act gains it (contamination need), certifies acts that no prior
can ever make optimal, and trades these stability measures off against
selection costs along an exactly computed path.  A scenario pipeline builds
the underlying decision problems from monthly return data.
"""

__version__ = "0.1.0"

from .beliefs import PriorCatalog, default_catalog
from .core import (
    BayesSet,
    DecisionProblem,
    Prior,
    affine_transform,
    bayes_acts,
    expected_utility,
)
from .lp import (
    BandBox,
    BandFeasibility,
    LinearProgram,
    LpOutcome,
    LpStatus,
    SolverError,
    band_feasible_with_halfspaces,
    minimize_over_band,
    solve_lp,
)
from .scenarios import (
    REGIME_ORDER,
    PortfolioBook,
    RegimeModel,
    ReturnPanel,
    generic_labels,
    kmeans_partition,
    label_regimes,
    monthly_features,
    portfolio_returns,
    utility_matrix,
)
from .selection import (
    CostAssignment,
    GammaResult,
    RexResult,
    ScoreBranch,
    SelectionPath,
    StabilityScore,
    gamma_aggregate,
    optimal_acts,
    rex_score,
    selection_path,
    stability_score,
    variance_cost,
)
from .stability import (
    BisectionConfig,
    DominanceCertificate,
    Need,
    NeedKind,
    Radius,
    RadiusKind,
    StabilityProfile,
    StabilityRow,
    contamination_need,
    pairwise_margin,
    robustness_radius,
    stability_profile,
    strict_inadmissibility_certificate,
    worst_case_margin,
)

__all__ = [
    "__version__",
    "BandBox",
    "BandFeasibility",
    "BayesSet",
    "BisectionConfig",
    "CostAssignment",
    "DecisionProblem",
    "DominanceCertificate",
    "GammaResult",
    "LinearProgram",
    "LpOutcome",
    "LpStatus",
    "Need",
    "NeedKind",
    "PortfolioBook",
    "Prior",
    "PriorCatalog",
    "Radius",
    "RadiusKind",
    "REGIME_ORDER",
    "RegimeModel",
    "ReturnPanel",
    "RexResult",
    "ScoreBranch",
    "SelectionPath",
    "SolverError",
    "StabilityProfile",
    "StabilityRow",
    "StabilityScore",
    "affine_transform",
    "band_feasible_with_halfspaces",
    "bayes_acts",
    "contamination_need",
    "default_catalog",
    "expected_utility",
    "gamma_aggregate",
    "generic_labels",
    "kmeans_partition",
    "label_regimes",
    "minimize_over_band",
    "monthly_features",
    "optimal_acts",
    "pairwise_margin",
    "portfolio_returns",
    "rex_score",
    "robustness_radius",
    "selection_path",
    "solve_lp",
    "stability_profile",
    "stability_score",
    "strict_inadmissibility_certificate",
    "utility_matrix",
    "variance_cost",
    "worst_case_margin",
]
