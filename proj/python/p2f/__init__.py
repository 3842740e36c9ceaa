"""Prompt2Forget: metrics, memory simulator and pipeline tools."""

from ._core import (  # noqa: F401
    Error,
    InvalidArgument,
    ValidationError,
    expected_exact_forgetfulness,
    expected_genuine_recall,
    forgetfulness,
    normalized_tokens,
    parse_corpus,
    prf1,
    ratio_sweep,
    run_cli,
    scaffold,
    select_best_candidate,
    semantic_distinction_ratio,
    similarity,
    structure_consistency,
    tokenize,
)

__version__ = "0.1.0"
