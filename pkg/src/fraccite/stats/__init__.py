"""Statistical procedures: correlations, k-sample tests, Dunnett's C."""

from .correlation import CorrelationMatrix, UndefinedCorrelation, correlation_matrix, midranks, pearson, spearman, stars
from .distributions import ConvergenceError
from .inference import (
    DegenerateSample,
    GroupedSample,
    PairwiseComparison,
    TestResult,
    anova_oneway,
    dunnett_c,
    kruskal_wallis,
    levene,
)
from .studentized_range import quantile as studentized_range_quantile

__all__ = [
    "ConvergenceError",
    "CorrelationMatrix",
    "DegenerateSample",
    "GroupedSample",
    "PairwiseComparison",
    "TestResult",
    "UndefinedCorrelation",
    "anova_oneway",
    "correlation_matrix",
    "dunnett_c",
    "kruskal_wallis",
    "levene",
    "midranks",
    "pearson",
    "spearman",
    "stars",
    "studentized_range_quantile",
]
