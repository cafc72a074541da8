"""Pearson/Spearman correlation with pairwise deletion of undefined values."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata
from scipy.stats import t as t_dist

MIN_PAIRS = 3


@dataclass(frozen=True)
class CorrelationResult:
    pearson_r: float | None
    spearman_rho: float | None
    p_value: float | None
    n_pairs: int
    flag: str | None = None


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Plain product-moment correlation; None when either side is constant."""
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(np.dot(xc, yc)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p for H0: no association, via the t transform with n-2 df."""
    if n < 3:
        return float("nan")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * t_dist.sf(abs(t), n - 2))


def correlate_vectors(x, y) -> CorrelationResult:
    """Correlate two equal-length sequences; None entries are deleted pairwise."""
    pairs = [(a, b) for a, b in zip(x, y) if a is not None and b is not None]
    n = len(pairs)
    if n < MIN_PAIRS:
        return CorrelationResult(None, None, None, n, "insufficient pairs")
    ax = np.array([p[0] for p in pairs], dtype=np.float64)
    ay = np.array([p[1] for p in pairs], dtype=np.float64)
    r = pearson(ax, ay)
    if r is None:
        return CorrelationResult(None, None, None, n, "degenerate variance")
    rho = pearson(rankdata(ax), rankdata(ay))
    if rho is not None:
        rho = min(1.0, max(-1.0, rho))
    return CorrelationResult(r, rho, pearson_p_value(r, n), n)


def correlate_values(full: dict, reduced: dict, nodes) -> CorrelationResult:
    """Correlate a metric across two node->value maps over the given nodes.

    A node participates only when the metric is defined on both sides.
    """
    x = []
    y = []
    for node in nodes:
        a = full.get(node)
        b = reduced.get(node)
        if a is not None and b is not None:
            x.append(float(a))
            y.append(float(b))
    return correlate_vectors(x, y)
