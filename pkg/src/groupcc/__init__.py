"""Variable-interaction grouping for black-box continuous optimization.

Decomposes problems into groups of interacting variables via ranking-based
monotonicity checks, ships differential-grouping baselines, ground-truth
benchmark generators, accuracy metrics, cooperative co-evolution drivers,
a multi-path routing problem, and an experiment harness.
"""

from .baselines import (
    DgProbe,
    FvilConfig,
    Rdg3Config,
    dg_pair_check,
    fvil_decompose,
    rdg3_decompose,
    rdg_group_check,
)
from .cc import CcConfig, ComponentState, cc_run, cc_trace_csv, update_contribution
from .errors import (
    ConfigError,
    FeasibilityError,
    GenerationError,
    GroundTruthError,
    GroupCcError,
    StructureError,
    ValidationError,
)
from .interaction import (
    CachedObjective,
    EpsilonModel,
    InteractionMatrix,
    Ranking,
    SampleMatrix,
    Witness,
    build_sample_matrix,
    check_interaction,
    create_first_ranking,
    gamma,
    is_interaction,
    pair_epsilon,
    sgn_eps,
    update_matrix,
)
from .irrg import Decomposition, IrrgConfig, consider_variables, interact, irrg, rrg
from .metrics import AccuracyScores, score
from .optimizers import (
    EsState,
    MtsLs1Config,
    OptimizerRun,
    ShadeConfig,
    es_component_optimize,
    find_xhq,
    mts_ls1,
    shade_optimize,
    trace_csv,
)
from .problems import (
    GroupSpec,
    OverlapSpec,
    ProblemInstance,
    StructureSpec,
    build_instance,
    evaluate,
    fully_separable,
    get_fixture,
    ground_truth_matrix,
    load_problem,
    overlapping_chain,
    planted_blocks,
)
from .routing import (
    Demand,
    Link,
    Network,
    RoutingInstance,
    decode_fractions,
    evaluate_delay,
    four_node_example,
    generate_instance,
)
from .stats import holm_bonferroni, wilcoxon_rank_sum

__version__ = "0.1.0"
