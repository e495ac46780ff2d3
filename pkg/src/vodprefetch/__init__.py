"""Request-pattern clustering and prototype prefetching for VoD traces.

The pipeline: parse web logs into per-client sessions, turn each session
into a binary request pattern over the video base vector, cluster the
patterns with a vigilance-gated adaptive-resonance network, prefetch each
cluster prototype's URLs, and score hits against the next session window.
"""

from .art1 import (
    Art1Config,
    Art1Network,
    Assignment,
    CapacityError,
    ClusterReport,
    init_network,
    load_snapshot,
    match_values,
    present_pattern,
    render_snapshot,
    report_clusters,
    save_snapshot,
    select_winner,
    similarity,
    train,
)
from .logs import (
    AccessEvent,
    LogParseError,
    LogRecord,
    Session,
    group_sessions_by_window,
    parse_log_file,
    parse_log_line,
    parse_log_lines,
    preprocess,
    segment_sessions,
)
from .patterns import (
    BaseVector,
    PatternVector,
    UnknownVideoError,
    build_base_vector,
    extend_base_vector,
    extract_pattern,
    patterns_for_sessions,
    render_pattern_matrix,
    write_pattern_matrix,
)
from .prefetch import (
    CacheMetrics,
    EvaluationResult,
    PrefetchPlan,
    build_plan,
    evaluate_plan,
    member_weighted_accuracy,
    render_metrics_csv,
    sliding_run,
    write_metrics_csv,
)
from .workload import (
    GroundTruth,
    WorkloadConfig,
    ZipfSampler,
    generate,
    plant_ground_truth,
    popularity_histogram,
    write_ground_truth,
    write_trace_log,
)

__version__ = "0.1.0"

__all__ = [
    "AccessEvent",
    "Art1Config",
    "Art1Network",
    "Assignment",
    "BaseVector",
    "CacheMetrics",
    "CapacityError",
    "ClusterReport",
    "EvaluationResult",
    "GroundTruth",
    "LogParseError",
    "LogRecord",
    "PatternVector",
    "PrefetchPlan",
    "Session",
    "UnknownVideoError",
    "WorkloadConfig",
    "ZipfSampler",
    "build_base_vector",
    "build_plan",
    "evaluate_plan",
    "extend_base_vector",
    "extract_pattern",
    "generate",
    "group_sessions_by_window",
    "init_network",
    "load_snapshot",
    "match_values",
    "member_weighted_accuracy",
    "parse_log_file",
    "parse_log_line",
    "parse_log_lines",
    "patterns_for_sessions",
    "plant_ground_truth",
    "popularity_histogram",
    "preprocess",
    "present_pattern",
    "render_metrics_csv",
    "render_pattern_matrix",
    "render_snapshot",
    "report_clusters",
    "save_snapshot",
    "segment_sessions",
    "select_winner",
    "similarity",
    "sliding_run",
    "train",
    "write_ground_truth",
    "write_metrics_csv",
    "write_pattern_matrix",
    "write_trace_log",
]
