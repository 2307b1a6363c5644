"""Densely defined closed operators in block-diagonal form."""

from .calculus import (
    Classification,
    GraphModule,
    Predicates,
    SurjectivityEvidence,
    TransformPair,
    adjoint_via_graph,
    block_predicates,
    bounded_transform,
    classify,
    graph,
    graph_decomposition_residual,
    inverse_transform,
    one_plus_tstar_t_surjective,
    v_unitary,
)
from .criteria import (
    DEFAULT_C_SAMPLES,
    ClosedRangeCertificate,
    GeometricEvidence,
    RegularityCertificate,
    block_identities,
    closed_range_check,
    graph_inclusion,
    identities_hold,
    kernel_range_identities,
    kucerovsky_geometric_check,
    regularity_check,
)
from .families import (
    DEFAULT_TRUNCATION,
    DerivedFamily,
    DiagOperator,
    ExplicitFamily,
    Family,
    ScalarFamily,
    TruncationWindow,
    diag_from_json,
    family_from_json,
    family_to_json,
    make_diag_operator,
    scalar_cell_operator,
)
from .growth import GrowthDescriptor, TailBound, parse_bound
