"""Metric measure graphs: analysis, Lipschitz extension, and AMLE.

The package models finite weighted graphs carrying vertex and edge
measures, computes the induced path metrics (ambient and essential),
audits metric-measure regularity (quasiconvexity, doubling, Hajlasz
gradients, Poincare inequalities), builds Nagata-dimension and Whitney
covers, and extends Lipschitz functions by the McShane, Whitney, and
absolutely minimizing (infinity-harmonic) constructions.
"""

from .util import (
    InputError,
    SizeError,
    CertifyError,
    LENGTH_TOL,
    MEASURE_TOL,
    SCHEMA_VERSION,
)
from .graph import (
    MetricMeasureGraph,
    Edge,
    Ball,
    PathResult,
    graph_from_dict,
    load_graph,
    save_graph,
    shortest_path,
    ball,
    components,
    lipschitz_constant,
)
from .analysis import (
    NegligibleMark,
    QCRow,
    QuasiconvexityReport,
    DoublingRow,
    DoublingReport,
    PoincareRow,
    PoincareReport,
    negligible_edges,
    essential_metric,
    essential_distance,
    quasiconvexity_constant,
    doubling_ratios,
    poincare_constant,
    hajlasz_gradient_from_upper,
    verify_hajlasz,
    local_to_global_gradient,
    c0_constant,
)
from .extension import (
    NagataCover,
    WhitneyData,
    VectorField,
    as_vector_field,
    mcshane_extend,
    truncate_extend,
    nagata_cover,
    whitney_cover,
    whitney_extend,
    vector_lipschitz_constant,
)
from .amle import (
    AMLEProblem,
    AMLESolution,
    solve_amle,
    check_amle_local,
    comparison_check,
    infinity_harmonic_extend,
)
from .spaces import (
    MeshSpec,
    gen_grid,
    gen_cusp,
    cusp_profile,
    gen_collapsed,
    gen_multi_collapse,
    gen_simplicial,
    gen_carpet,
)

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "SizeError",
    "CertifyError",
    "LENGTH_TOL",
    "MEASURE_TOL",
    "SCHEMA_VERSION",
    "MetricMeasureGraph",
    "Edge",
    "Ball",
    "PathResult",
    "graph_from_dict",
    "load_graph",
    "save_graph",
    "shortest_path",
    "ball",
    "components",
    "lipschitz_constant",
    "NegligibleMark",
    "QCRow",
    "QuasiconvexityReport",
    "DoublingRow",
    "DoublingReport",
    "PoincareRow",
    "PoincareReport",
    "negligible_edges",
    "essential_metric",
    "essential_distance",
    "quasiconvexity_constant",
    "doubling_ratios",
    "poincare_constant",
    "hajlasz_gradient_from_upper",
    "verify_hajlasz",
    "local_to_global_gradient",
    "c0_constant",
    "NagataCover",
    "WhitneyData",
    "VectorField",
    "as_vector_field",
    "mcshane_extend",
    "truncate_extend",
    "nagata_cover",
    "whitney_cover",
    "whitney_extend",
    "vector_lipschitz_constant",
    "AMLEProblem",
    "AMLESolution",
    "solve_amle",
    "check_amle_local",
    "comparison_check",
    "infinity_harmonic_extend",
    "MeshSpec",
    "gen_grid",
    "gen_cusp",
    "cusp_profile",
    "gen_collapsed",
    "gen_multi_collapse",
    "gen_simplicial",
    "gen_carpet",
    "__version__",
]
