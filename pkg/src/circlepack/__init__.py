"""Equal circle packing: pack n unit circles into the smallest enclosing circle.

The solver minimizes an elastic overlap energy with a quasi-Newton
optimizer, escapes stuck layouts by briefly optimizing in a shrunken
container, and squeezes feasible layouts with a probe-plus-bisection
radius adjustment. See the README for the command line interface.
"""

from .geometry import (
    FEASIBLE_ENERGY,
    Energy,
    Layout,
    Rng,
    container_depth,
    is_feasible,
    pair_depth,
    random_layout,
    total_energy,
)
from .neighbors import (
    DEFAULT_CONTAINER_MARGIN,
    DEFAULT_PAIR_MARGIN,
    NeighborIndex,
    build_index,
    energy_gradient_full,
    energy_gradient_local,
    full_index,
    index_energy,
)
from .optimizer import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_REFRESH_PERIOD,
    GRADIENT_TOLERANCE,
    BfgsState,
    IterationRecord,
    OptimizeOutcome,
    OptimizeStatus,
    bfgs_minimize,
    line_search,
    run_bounded,
    update_inverse_hessian,
)
from .search import (
    HOP_ITERATION_RANGE,
    RADIUS_RESOLUTION,
    AdjustResult,
    HopBatch,
    SolveReport,
    SolveStatus,
    basin_hop,
    container_adjust,
    global_search,
    minimize_radius,
    shrink_factors,
)
from .layout_io import (
    BestKnownTable,
    ImprovementRecord,
    LayoutDocument,
    LayoutFormatError,
    TableValidationError,
    VerificationResult,
    Violation,
    format_decimal,
    load_best_known,
    load_improvements,
    read_best_known,
    read_improvements,
    read_layout,
    verify_layout,
    write_layout,
)
from .rendering import render_svg
from .bench import (
    BenchRecord,
    ModeTimingRecord,
    RefreshRecord,
    derive_seed,
    run_hits,
    run_mode_timing,
    run_refresh_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "FEASIBLE_ENERGY",
    "Energy",
    "Layout",
    "Rng",
    "container_depth",
    "is_feasible",
    "pair_depth",
    "random_layout",
    "total_energy",
    "DEFAULT_CONTAINER_MARGIN",
    "DEFAULT_PAIR_MARGIN",
    "NeighborIndex",
    "build_index",
    "energy_gradient_full",
    "energy_gradient_local",
    "full_index",
    "index_energy",
    "DEFAULT_MAX_ITERATIONS",
    "DEFAULT_REFRESH_PERIOD",
    "GRADIENT_TOLERANCE",
    "BfgsState",
    "IterationRecord",
    "OptimizeOutcome",
    "OptimizeStatus",
    "bfgs_minimize",
    "line_search",
    "run_bounded",
    "update_inverse_hessian",
    "HOP_ITERATION_RANGE",
    "RADIUS_RESOLUTION",
    "AdjustResult",
    "HopBatch",
    "SolveReport",
    "SolveStatus",
    "basin_hop",
    "container_adjust",
    "global_search",
    "minimize_radius",
    "shrink_factors",
    "BestKnownTable",
    "ImprovementRecord",
    "LayoutDocument",
    "LayoutFormatError",
    "TableValidationError",
    "VerificationResult",
    "Violation",
    "format_decimal",
    "load_best_known",
    "load_improvements",
    "read_best_known",
    "read_improvements",
    "read_layout",
    "verify_layout",
    "write_layout",
    "BenchRecord",
    "ModeTimingRecord",
    "RefreshRecord",
    "derive_seed",
    "run_hits",
    "run_mode_timing",
    "run_refresh_sweep",
    "render_svg",
    "__version__",
]
