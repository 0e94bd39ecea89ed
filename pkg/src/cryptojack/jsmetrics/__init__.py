"""Static complexity metrics for JavaScript sources."""

from .cfg import CfgSummary, build_cfg_summary
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    compute_features,
    export_feature_matrix,
    halstead_measures,
    maintainability,
    read_feature_matrix,
)
from .halstead import TokenAccounting, tokenize_and_count

__all__ = [
    "CfgSummary",
    "FEATURE_NAMES",
    "FeatureVector",
    "TokenAccounting",
    "build_cfg_summary",
    "compute_features",
    "export_feature_matrix",
    "halstead_measures",
    "maintainability",
    "read_feature_matrix",
    "tokenize_and_count",
]
