"""Pearson and Spearman correlation with two-tailed t-approximation p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distributions import t_two_sided


class UndefinedCorrelation(ValueError):
    """Correlation requested for a vector with zero variance."""


def midranks(values) -> np.ndarray:
    """1-based ranks with ties replaced by the average of the tied positions."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    ranks = np.empty(len(x), dtype=float)
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sorted_x[1:] != sorted_x[:-1]])
    ends = np.r_[starts[1:], len(x)]
    avg = (starts + ends + 1) / 2.0
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"vectors must be 1-d and of equal length, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise ValueError("at least 3 observations are required")
    return x, y


def _r_and_p(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("correlation is undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    n = len(x)
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, t_two_sided(t, n - 2)


def pearson(x, y) -> tuple[float, float]:
    """Product-moment correlation and its two-tailed p-value (t with n-2 df)."""
    return _r_and_p(*_check_pair(x, y))


def spearman(x, y) -> tuple[float, float]:
    """Rank correlation: Pearson on mid-ranks, same t approximation for p."""
    x, y = _check_pair(x, y)
    return _r_and_p(midranks(x), midranks(y))


def stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    pearson_r: np.ndarray
    pearson_p: np.ndarray
    spearman_rho: np.ndarray
    spearman_p: np.ndarray
    n: int

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def pearson(self, a: str, b: str) -> tuple[float, float]:
        i, j = self.index(a), self.index(b)
        return float(self.pearson_r[i, j]), float(self.pearson_p[i, j])

    def spearman(self, a: str, b: str) -> tuple[float, float]:
        i, j = self.index(a), self.index(b)
        return float(self.spearman_rho[i, j]), float(self.spearman_p[i, j])


def correlation_matrix(
    parameters: Mapping[str, Sequence[float]] | Sequence[tuple[str, Sequence[float]]],
) -> CorrelationMatrix:
    items = list(parameters.items()) if isinstance(parameters, Mapping) else list(parameters)
    labels = tuple(label for label, _ in items)
    if len(set(labels)) != len(labels):
        raise ValueError("parameter labels must be unique")
    vectors = [np.asarray(v, dtype=float) for _, v in items]
    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise ValueError(f"all parameter vectors must have the same length, got {sorted(lengths)}")
    m = len(vectors)
    pr, pp = np.eye(m), np.zeros((m, m))
    sr, sp = np.eye(m), np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            pr[i, j], pp[i, j] = pearson(vectors[i], vectors[j])
            sr[i, j], sp[i, j] = spearman(vectors[i], vectors[j])
            pr[j, i], pp[j, i] = pr[i, j], pp[i, j]
            sr[j, i], sp[j, i] = sr[i, j], sp[i, j]
    return CorrelationMatrix(labels, pr, pp, sr, sp, lengths.pop() if lengths else 0)
