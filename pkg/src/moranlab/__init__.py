"""Moran's I on graphs: weight matrices, exact score ranges, local and
random-walk diagnostics."""

from .errors import MoranError
from .graphcore import (
    Graph,
    build_graph,
    gen_cycle,
    gen_double_star,
    gen_grid,
    gen_hex_hexagon,
    gen_path,
    gen_random_connected,
    gen_torus,
    random_edge_deletion,
    structure_report,
)
from .ingest import (
    AttributeTable,
    emit_report,
    impute_zero_population,
    load_attributes_csv,
    load_graph_json,
    parse_report,
    save_graph_json,
)
from .moran import (
    LocalReport,
    MoranReport,
    NodeVector,
    d_i_diagnostic,
    local_moran,
    local_report,
    moran_i,
    moran_report,
    moran_scatter,
    permutation_test,
)
from .randwalk import WalkDiagnostics, outer_square, variance_profile, walk_diagnostics, walk_step
from .spectral import (
    SpectralRange,
    achievable_range,
    decompose_i,
    degree_eigenvalue_bounds,
    dirichlet_energy,
    fiedler_vector,
    generalized_extremes,
    lagrange_extremes_p,
    spectral_gap,
    spectrum_report,
    symmetric_spectrum,
)
from .weights import WeightKind, WeightMatrix, build_weights, l1_offdiag_distance, validate_bistochastic, weights_from_matrix

__version__ = "0.1.0"
