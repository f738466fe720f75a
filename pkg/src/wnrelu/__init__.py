"""Weight-normalized ReLU networks: exact function-preserving rewriting,
shallow-to-deep compilation, capacity bound calculators, and empirical
Rademacher estimation."""

from .netcore import (
    INF,
    AffineMap,
    Certificate,
    ClassSpec,
    MembershipReport,
    NetworkFormatError,
    NormSpec,
    WnNetwork,
    class_check,
    evaluate,
    layer_norms,
    load_network,
    lpq_norm,
    save_network,
)
from .transform import (
    BudgetExceededError,
    ConstantNotRepresentableError,
    RewriteReport,
    canonicalize,
    constant_network,
    convert_norm_budget,
    deepen,
    motivating_networks,
    scale_output,
    widen,
)
from .compiler import (
    CompilePlan,
    ShallowNet,
    compile_to_depth,
    load_shallow,
    save_shallow,
    split_signs,
    unit_normalize,
)
from .capacity import (
    BoundReport,
    approx_error_bound,
    approx_plan,
    bound_auto,
    bound_l1,
    bound_lpq,
    dependence_regime,
    generalization_bound,
    input_correlation_constant,
    l1_corollary_bound,
    residual_schedule,
    shattering_budget,
)
from .estimate import (
    EstimateConfig,
    EstimateReport,
    Sample,
    UnsupportedNormError,
    divergence_table,
    empirical_rademacher,
    project_l1,
    project_lpq,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "AffineMap",
    "Certificate",
    "ClassSpec",
    "MembershipReport",
    "NetworkFormatError",
    "NormSpec",
    "WnNetwork",
    "class_check",
    "evaluate",
    "layer_norms",
    "load_network",
    "lpq_norm",
    "save_network",
    "BudgetExceededError",
    "ConstantNotRepresentableError",
    "RewriteReport",
    "canonicalize",
    "constant_network",
    "convert_norm_budget",
    "deepen",
    "motivating_networks",
    "scale_output",
    "widen",
    "CompilePlan",
    "ShallowNet",
    "compile_to_depth",
    "load_shallow",
    "save_shallow",
    "split_signs",
    "unit_normalize",
    "BoundReport",
    "approx_error_bound",
    "approx_plan",
    "bound_auto",
    "bound_l1",
    "bound_lpq",
    "dependence_regime",
    "generalization_bound",
    "input_correlation_constant",
    "l1_corollary_bound",
    "residual_schedule",
    "shattering_budget",
    "EstimateConfig",
    "EstimateReport",
    "Sample",
    "UnsupportedNormError",
    "divergence_table",
    "empirical_rademacher",
    "project_l1",
    "project_lpq",
]
