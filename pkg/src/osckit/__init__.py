"""Rectangle mean-oscillation norms on periodic N-dimensional grids.

The package computes four norm families (plain, best-constant, log-weighted,
and their split-averaged variants) by exhaustive rectangle enumeration with
summed-area-table means, generates the log-shell and separable test
functions used as witnesses, and runs a verification harness that turns the
norm inequalities into measured pass/fail experiments.
"""

from .grid import (
    Arc,
    CoordSplit,
    GFN1Error,
    GridFunction,
    PeriodicRect,
    SummedAreaTable,
    all_splits,
    build_sat,
    cell_centers,
    pairwise_cumsum,
    partial_mean,
    read_gfn1,
    rect_mean,
    write_gfn1,
)
from .norms import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    EnumMode,
    NormReport,
    arcs_for_axis,
    bmo_m_norm,
    bmo_norm,
    lmo_inv_norm,
    lmo_m_norm,
    lmo_norm,
    mean_log_ratio,
    osc_l1,
    slice_bmo_norm,
    star_norm,
)
from .testfn import (
    FACTORS,
    PRNG_ID,
    LogArcSpec,
    from_spec,
    make_log_arc,
    make_log_rect,
    make_random_dyadic,
    make_separable,
)
from .verify import (
    DEFAULT_PHI,
    SCHEMA,
    DivisionDegenerate,
    SweepResult,
    check_equivalences,
    divergence_witness,
    dyadic_square_family,
    embedding_gap_sweep,
    lmo_contrast_sweep,
    mean_bound_sharpness,
    multiplier_upper_bound,
    report_csv,
    report_json,
)

__version__ = "0.1.0"
