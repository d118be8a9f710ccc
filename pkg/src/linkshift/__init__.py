"""linkshift: critical-transition detection in temporal weighted directed
networks via per-link Kullback-Leibler divergences."""

__version__ = "0.1.0"

from .entropy import (  # noqa: F401
    MBIT,
    CellIndicators,
    Classification,
    Monotone,
    cell_indicators,
    classify,
    kl_divergence,
    shannon_entropy,
)
from .ingest import (  # noqa: F401
    RenameMap,
    SliceDescriptives,
    YearSlice,
    describe,
    parse_edge_list,
    parse_rename_map,
    resolve_renames,
)
from .temporal import (  # noqa: F401
    CellSeries,
    EligibilityMode,
    EligibilityPolicy,
    MovingAggregate,
    build_aggregates,
    cell_series,
    eligible_links,
    evaluation_years,
    normalize,
)
