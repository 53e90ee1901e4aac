"""Splitter networks for shared-memory renaming.

Build splitter topologies (triangular grids, binary-tree blockers, staged
networks, adaptive chains), run processes through them under deterministic
or adversarial schedulers, race real threads through them, enumerate every
schedule on small instances, and verify the claimed properties against
recorded traces.
"""

from .analysis import (
    AnalysisError,
    GridRegion,
    Metrics,
    Violation,
    capacity,
    check_all,
    check_blockers,
    check_lemma1,
    check_result,
    check_splitter_properties,
    compute_metrics,
    grid_regions,
    min_guaranteed_stops,
    region_for_stage,
    schedule_of,
    stage_ratios,
)
from .engine import (
    POLICIES,
    EngineError,
    ExecutionResult,
    OutcomeEvent,
    ScheduleError,
    Trace,
    read_schedule,
    read_trace,
    replay,
    simulate,
    trace_from_jsonl,
    trace_to_jsonl,
    write_schedule,
    write_trace,
)
from .explore import ExploreBudgetError, PropertyReport, explore_exhaustive
from .splitter import (
    Outcome,
    Phase,
    RegisterEvent,
    SplitterError,
    SplitterState,
    StepCursor,
    run_solo,
    step,
)
from .threads import execute_threads
from .topology import (
    BuildReport,
    Node,
    Topology,
    TopologyError,
    build_adaptive,
    build_full,
    build_grid,
    build_stage,
    build_tree,
    ceil_sqrt,
    export,
    export_dot,
    export_json,
    import_json,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "BuildReport",
    "EngineError",
    "ExecutionResult",
    "ExploreBudgetError",
    "GridRegion",
    "Metrics",
    "Node",
    "Outcome",
    "OutcomeEvent",
    "POLICIES",
    "Phase",
    "PropertyReport",
    "RegisterEvent",
    "ScheduleError",
    "SplitterError",
    "SplitterState",
    "StepCursor",
    "Topology",
    "TopologyError",
    "Trace",
    "Violation",
    "build_adaptive",
    "build_full",
    "build_grid",
    "build_stage",
    "build_tree",
    "capacity",
    "ceil_sqrt",
    "check_all",
    "check_blockers",
    "check_lemma1",
    "check_result",
    "check_splitter_properties",
    "compute_metrics",
    "execute_threads",
    "explore_exhaustive",
    "export",
    "export_dot",
    "export_json",
    "grid_regions",
    "import_json",
    "min_guaranteed_stops",
    "read_schedule",
    "read_trace",
    "region_for_stage",
    "replay",
    "run_solo",
    "schedule_of",
    "simulate",
    "stage_ratios",
    "step",
    "trace_from_jsonl",
    "trace_to_jsonl",
    "validate",
    "write_schedule",
    "write_trace",
]
