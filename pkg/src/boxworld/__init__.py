"""boxworld: exact analysis of non-signaling behaviors and key-rate bounds.

The rational core (behaviors, polytopes, ensembles, complete extensions)
is exact; the secrecy quantifiers and state bounds are float numerics.
"""

from .behavior import (
    Behavior,
    Scenario,
    ShapeError,
    ValidationReport,
    anti_pr_box,
    behavior_from_dict,
    behavior_from_json,
    behavior_to_dict,
    behavior_to_json,
    chsh,
    convex_mix,
    equal_up_to_party_relabeling,
    iso,
    local_vertex,
    marginal,
    maximally_mixed_single,
    merge_parties,
    nonlocal_vertex,
    permute_parties,
    pr_box,
    relabel,
    single_party_vertex,
    tensor,
    validate,
)
from .convexify import BoundCurve, lower_convex_hull
from .extension import (
    AmbiguousWeightsError,
    CompleteExtension,
    DimBoundReport,
    Ensemble,
    GenerationResult,
    PreconditionError,
    Wiring,
    generate_extension,
    minimal_ensembles,
    nsce,
    nsce_actual_dimension,
    nsce_dim_bound,
    pm_mirror_report,
    verify_access,
)
from .polytope import (
    NsPolytope,
    ScenarioTooLargeError,
    Vertex,
    certify_extremality,
    contains,
    dimension,
    local_contains,
    nonlocality_cost,
    vertices,
)
from .privstate import (
    DenseOperator,
    OverheadResult,
    binary_entropy,
    build_omega,
    build_private_state,
    is_ppt,
    key_attack,
    lemma1_shield_bound,
    lemma2_bounds,
    mdi_capacity,
    measure_key_part,
    partial_transpose,
    repeaterless_bound,
    scheme_memory,
    swap_matrix,
    thm1_overhead,
    thm3_overhead,
    thm5_overhead,
)
from .secrecy import (
    CdState,
    EveStrategy,
    IntrinsicConfig,
    IntrinsicResult,
    NsqConfig,
    NsqResult,
    SquashConfig,
    SquashResult,
    StochasticChannel,
    TripartiteDistribution,
    cond_mutual_information,
    ideal_key_cd,
    intrinsic_information,
    measure_device,
    mutual_information,
    ns_norm_cd,
    shannon_entropy,
    squash,
    squashed_nonlocality,
    squashed_quantifier,
)

__version__ = "0.1.0"
