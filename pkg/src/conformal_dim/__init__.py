"""Overlap diagnostics, dimension estimates, and pseudo-tangent
witnesses for one-dimensional conformal iterated function systems."""

from .budget import DEFAULT_WORD_BUDGET, ENV_VAR, Budget, resolve_budget
from .cylinders import (
    CylinderRecord,
    StoppingSet,
    compose_word,
    distinct_maps,
    scale_grid,
    stopping_records,
    stopping_set,
    word_str,
)
from .dimension import (
    AGREE,
    FULL_ASSOUAD,
    INCONSISTENT,
    DichotomyReport,
    DimensionEstimate,
    assouad_estimate,
    bowen_dimension,
    box_dimension,
    cover_count,
    dichotomy_report,
)
from .distortion import (
    CheckResult,
    DistortionReport,
    HolderReport,
    check_composition_holder,
    check_inverse_composition_holder,
    estimate_distortion_constant,
    fit_composition_holder,
)
from .errors import (
    BudgetExceeded,
    ConformalDimError,
    DomainViolation,
    EmptySet,
    ExtensionFailed,
    InsufficientScales,
    NoFixedPointInDomain,
    NoRootInBracket,
    NotAContraction,
    NoUsablePairs,
    ParseError,
    PointsDiverged,
    PoleEntersDomain,
    PoleInDomain,
    PoleProximity,
    PreconditionNotMet,
    StepSelectionFailed,
    TrivialSystem,
)
from .maps import (
    ConformalMap,
    Interval,
    MapDistance,
    affine,
    compose,
    derivative,
    deriv_range,
    evaluate,
    invert_extended,
    is_identity,
    maps_close,
    moebius,
    normalize,
    sup_distance_to_identity,
)
from .separation import (
    INCONCLUSIVE,
    WSP_CONSISTENT,
    WSP_FAILING,
    NearIdentityPair,
    ScaleScan,
    SeparationReport,
    default_depth,
    epsilon_separation_bound,
    nearest_identity_distance,
    overlap_multiplicity,
    scan_scales,
    separation_verdict,
)
from .system import (
    IfsSystem,
    ValidationReport,
    attractor_sample,
    fixed_point,
    load_system,
    load_system_file,
    parse_config,
)
from .tangents import (
    ABOVE,
    BELOW,
    GapProfile,
    LadderStep,
    TangentPair,
    TangentWitness,
    TransportCheck,
    build_tangent_witness,
    check_covering_transport,
    extend_pair,
    gap_profile,
    left_hausdorff_distance,
    select_tangent_pairs,
)

__version__ = "0.1.0"
