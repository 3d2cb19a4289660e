"""Tracing, mining, and scoring of bug-inducing commits."""

from .engine import (
    PRESETS,
    RefactoringRanges,
    VariantConfig,
    load_refactoring_ranges,
    preset,
    preset_name,
    run_config,
    run_variant,
    simulate_best_case_issue_date,
)
from .errors import (
    AmbiguousCommitError,
    BictraceError,
    ConfigurationError,
    CorruptRepositoryError,
    LineOutOfRangeError,
    NotAParentError,
    NotARepositoryError,
    PathMissingError,
    RootCommitError,
    SchemaError,
    UnknownCommitError,
)
from .evaluate import (
    DetectionRun,
    Metrics,
    emit_report,
    exclusive_correct,
    load_run,
    macro_metrics,
    outlier_filter,
    overlap,
    pooled_metrics,
    save_run,
)
from .gitrepo import GitRepo, open_repo
from .langfilters import (
    LineClass,
    SUPPORTED_LANGUAGES,
    classify_lines,
    is_cosmetic_change,
    is_cosmetic_commit,
    language_for_path,
)
from .miner import MessageAnalysis, RunSummary, SentenceTree, Token, mine_stream
from .oracle import (
    IssueRef,
    OracleDataset,
    OracleEntry,
    load_oracle,
    save_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousCommitError",
    "BictraceError",
    "ConfigurationError",
    "CorruptRepositoryError",
    "DetectionRun",
    "GitRepo",
    "IssueRef",
    "LineClass",
    "LineOutOfRangeError",
    "MessageAnalysis",
    "Metrics",
    "NotAParentError",
    "NotARepositoryError",
    "OracleDataset",
    "OracleEntry",
    "PRESETS",
    "PathMissingError",
    "RefactoringRanges",
    "RootCommitError",
    "RunSummary",
    "SUPPORTED_LANGUAGES",
    "SchemaError",
    "SentenceTree",
    "Token",
    "UnknownCommitError",
    "VariantConfig",
    "classify_lines",
    "emit_report",
    "exclusive_correct",
    "is_cosmetic_change",
    "is_cosmetic_commit",
    "language_for_path",
    "load_oracle",
    "load_refactoring_ranges",
    "load_run",
    "macro_metrics",
    "mine_stream",
    "open_repo",
    "outlier_filter",
    "overlap",
    "pooled_metrics",
    "preset",
    "preset_name",
    "run_config",
    "run_variant",
    "save_oracle",
    "save_run",
    "simulate_best_case_issue_date",
]
