"""Provider-practice analytics for patient blood management.

Filters, aggregates, splits, and statistically summarizes surgical
transfusion case records, with provenance-tracked shareable workspaces and
an HTTP API for interactive clients.
"""

from .model import (
    AttributeDescriptor,
    AttributeKind,
    BloodComponent,
    CaseRecord,
    ClinicalThresholds,
    ThresholdConfigError,
    Urgency,
    attribute_catalog,
    load_thresholds,
)
from .ingest import (
    CaseSet,
    IngestError,
    IngestReport,
    SyntheticProfile,
    generate_synthetic,
    generate_synthetic_with_truth,
    list_procedures,
    load_cases,
    write_cases,
)
from .cohort import (
    BrushRect,
    CaseSelection,
    Facet,
    FilterSpec,
    FlagPredicate,
    QueryError,
    RangePredicate,
    SplitKind,
    SplitSpec,
    apply_filters,
    brush_to_filter,
    case_details,
    facet_cases,
    split_groups,
)
from .stats import (
    BinSpec,
    bin_counts,
    confidence_interval,
    context_summary,
    distribution_summary,
    dotplot,
    dumbbell,
    heatmap,
    kde_curve,
)
from .provenance import (
    Action,
    ActionError,
    AddChart,
    Annotate,
    ChartConfig,
    ChartKind,
    ProvenanceTree,
    RemoveChart,
    SetFilter,
    SetViewMode,
    StateNotFoundError,
    StateStore,
    UpdateChart,
    WorkspaceState,
    annotate,
    apply_action,
    init_workspace,
    load_state,
    redo,
    save_state,
    undo,
)
from .server import create_app

__version__ = "0.1.0"
