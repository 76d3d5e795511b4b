"""Subnormality checks for weighted shifts on rooted directed trees.

Exact rational arithmetic throughout where the inputs allow it; every verdict
is scoped to a finite materialized region and a moment order N.
"""

from .classify import (
    EvidenceUpToOrder,
    HankelWitness,
    LeafObstruction,
    NotSubnormal,
    Subnormal,
    ThetaBoundWitness,
    Undecided,
    classify,
    leaf_obstruction,
    necessary_checks,
    recheck_certificate,
    recheck_witness,
    render_report,
)
from .consistency import (
    MeasureSystem,
    build_parent,
    condition_value,
    moments_match,
    nonzero_weight_specialization_check,
    propagate,
    verify_system,
)
from .errors import (
    ConsistencyViolation,
    DepthExceeded,
    ExtensionImpossible,
    InfiniteMeasure,
    KappaViolated,
    NotDescendant,
    OversizeRegion,
    ParseError,
    TreeShiftError,
    ValidationError,
)
from .measure import (
    Box,
    Measure,
    backward_extend,
    dirac,
    forward_map,
    mass_at_zero,
    measure,
    measure_distance,
    moment,
    restrict_normalized,
    uniform,
)
from .moments import (
    carleman_terms,
    divergence_certificate,
    hankel_check,
    is_stieltjes_prefix,
    theta_lower_bound,
)
from .problem import ProblemFile, classify_problem, parse_problem
from .scalar import INF, Surd
from .shift import (
    ShiftRegion,
    WeightFamily,
    apply_n,
    inner_product,
    lambda_path_modsq,
    norm_bound,
    norm_sq,
    norm_table,
    weights_from_table,
)
from .tree import (
    ExplicitFinite,
    FreeKAry,
    OneBranch,
    RootedPath,
    TableGenerated,
    TreeRegion,
    materialize,
)
from .truncate import convergence_report, truncate_triplet, truncated_lambda_path, verify_truncated

__version__ = "0.1.0"
