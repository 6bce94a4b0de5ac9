"""k-sample tests on per-paper impact values and Dunnett's C pairwise comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import studentized_range
from .correlation import midranks
from .distributions import chi2_sf, f_sf


class DegenerateSample(ValueError):
    """The sample does not carry enough variation for the requested test."""


@dataclass(frozen=True)
class GroupedSample:
    """Independent samples of unequal size, one per labelled group."""

    labels: tuple[str, ...]
    groups: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.groups):
            raise ValueError("labels and groups differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("group labels must be unique")
        for label, g in zip(self.labels, self.groups):
            if len(g) < 1:
                raise ValueError(f"group {label!r} is empty")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Iterable[float]] | Sequence[tuple[str, Iterable[float]]]):
        items = data.items() if isinstance(data, Mapping) else data
        labels, groups = [], []
        for label, values in items:
            labels.append(str(label))
            groups.append(np.asarray(list(values), dtype=float))
        return cls(tuple(labels), tuple(groups))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups])

    @property
    def n_total(self) -> int:
        return int(self.sizes.sum())


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    df: tuple[float, ...]
    p_value: float

    __test__ = False  # keep pytest from collecting this as a test class


@dataclass(frozen=True)
class PairwiseComparison:
    unit_a: str
    unit_b: str
    mean_diff: float
    critical_range: float
    significant: bool
    alpha: float


def _require_groups(sample: GroupedSample, min_size: int = 1) -> None:
    if sample.k < 2:
        raise ValueError("at least two groups are required")
    for label, g in zip(sample.labels, sample.groups):
        if len(g) < min_size:
            raise ValueError(f"group {label!r} has {len(g)} observations; at least {min_size} required")


def kruskal_wallis(sample: GroupedSample) -> TestResult:
    """Kruskal-Wallis H with mid-ranks and the tie correction; chi-square p-value."""
    _require_groups(sample)
    n = sample.n_total
    if n < 3:
        raise ValueError("at least 3 observations are required")
    pooled = np.concatenate(sample.groups)
    ranks = midranks(pooled)
    bounds = np.cumsum(sample.sizes)[:-1]
    center = (n + 1) / 2.0
    spread = sum(len(r) * (r.mean() - center) ** 2 for r in np.split(ranks, bounds))
    h = 12.0 / (n * (n + 1)) * spread
    _, counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(counts.astype(float) ** 3 - counts)) / (n**3 - n)
    if correction <= 0.0:
        raise DegenerateSample("all observations are identical; the tie correction is zero")
    h /= correction
    df = sample.k - 1
    return TestResult("kruskal-wallis", h, (df,), chi2_sf(h, df))


def _oneway(groups: Sequence[np.ndarray]) -> tuple[float, float, int, int]:
    sizes = np.array([len(g) for g in groups])
    grand = np.concatenate(groups).mean()
    ss_between = float(sum(len(g) * (g.mean() - grand) ** 2 for g in groups))
    ss_within = float(sum(((g - g.mean()) ** 2).sum() for g in groups))
    return ss_between, ss_within, len(groups) - 1, int(sizes.sum()) - len(groups)


def anova_oneway(sample: GroupedSample) -> TestResult:
    """One-way ANOVA F = MS_between / MS_within with (k-1, N-k) df."""
    _require_groups(sample)
    if sample.n_total <= sample.k:
        raise ValueError("one-way ANOVA needs more observations than groups")
    ssb, ssw, df1, df2 = _oneway(sample.groups)
    if ssw == 0.0:
        if ssb == 0.0:
            raise DegenerateSample("no variation within or between groups")
        return TestResult("anova", math.inf, (df1, df2), 0.0)
    f = (ssb / df1) / (ssw / df2)
    return TestResult("anova", f, (df1, df2), f_sf(f, df1, df2))


def levene(sample: GroupedSample, center: str = "mean") -> TestResult:
    """Levene's W: one-way ANOVA on absolute deviations from each group's center.

    `center="median"` gives the Brown-Forsythe variant.
    """
    _require_groups(sample, min_size=2)
    if center == "mean":
        z = [np.abs(g - g.mean()) for g in sample.groups]
    elif center == "median":
        z = [np.abs(g - np.median(g)) for g in sample.groups]
    else:
        raise ValueError(f"unknown center {center!r}")
    ssb, ssw, df1, df2 = _oneway(z)
    if ssw == 0.0:
        raise DegenerateSample("absolute deviations have no within-group variance")
    w = (ssb / df1) / (ssw / df2)
    return TestResult(f"levene-{center}", w, (df1, df2), f_sf(w, df1, df2))


def dunnett_c(sample: GroupedSample, alpha: float = 0.05) -> list[PairwiseComparison]:
    """Dunnett's C for all unordered pairs, robust to unequal variances.

    For groups i, j with a_i = s_i^2 / n_i and q_i = q(alpha; k, n_i - 1):

        critical = (q_i a_i + q_j a_j) / (a_i + a_j) * sqrt(a_i + a_j) / sqrt(2)

    Pairs come out in index order (0, 1), (0, 2), ..., (k-2, k-1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    _require_groups(sample, min_size=2)
    k = sample.k
    means = np.array([g.mean() for g in sample.groups])
    variances = np.array([g.var(ddof=1) for g in sample.groups])
    for label, v in zip(sample.labels, variances):
        if not v > 0.0 or not math.isfinite(v):
            raise DegenerateSample(f"group {label!r} has zero (or non-finite) variance")
    a = variances / sample.sizes
    q = np.array([studentized_range.quantile(alpha, k, float(n - 1)) for n in sample.sizes])
    i, j = np.triu_indices(k, 1)
    se2 = a[i] + a[j]
    crit = (q[i] * a[i] + q[j] * a[j]) / np.sqrt(se2) / math.sqrt(2.0)
    diff = means[i] - means[j]
    significant = np.abs(diff) > crit
    labels = sample.labels
    return [
        PairwiseComparison(labels[x], labels[y], d, c, s, alpha)
        for x, y, d, c, s in zip(i.tolist(), j.tolist(), diff.tolist(), crit.tolist(), significant.tolist())
    ]
