"""Structural balance, symmetry certificates, nonlinear consensus flows and
EDMD bipartition recovery on signed networks."""

__version__ = "0.1.0"

from .controllability import (
    RankReport,
    UncontrollabilityCertificate,
    certify_inaccessibility,
    controllability_matrix,
    empirical_invariance_probe,
    exact_rank,
    rank_with_tolerance,
)
from .dynamics import (
    NONLINEARITIES,
    FlowSystem,
    NonlinearFunction,
    Trajectory,
    bipartite_limit,
    controlled_field,
    flow_field,
    integrate,
)
from .errors import (
    DimensionError,
    DivergenceError,
    GraphError,
    NumericalError,
    SignedFlowError,
    UnbalancedGraphError,
    UnsupportedNonlinearityError,
)
from .koopman import (
    BipartitionEstimate,
    Dictionary,
    EDMDResult,
    SnapshotPairs,
    assemble_snapshots,
    bipartition_from_mode,
    build_dictionary,
    edmd_fit,
    evaluate_dictionary,
    extract_zero_mode,
    hermite,
    validate_against_gauge,
)
from .signed_graph import (
    BalanceCertificate,
    GaugeTransform,
    SignedGraph,
    check_structural_balance,
    cycle_sign_product,
    gauge_transformed_laplacian,
    signed_adjacency,
    signed_laplacian,
    zero_eigenvalue_check,
)
from .symmetry import (
    Permutation,
    SignedAutomorphism,
    apply_signed_automorphism,
    find_automorphisms,
    fixed_points,
    make_signed_automorphism,
    preserves_edge_signs,
)
