"""Rank-based AUC and an exact paired signed-rank permutation test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def auc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative
    (Mann-Whitney formulation; ties count 0.5)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    rank_sum = ranks[labels == 1].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


@dataclass
class SignificanceResult:
    p_value: float
    statistic: float  # signed-rank W+ on variant - baseline
    significant: bool  # improvement direction AND p < threshold


def wilcoxon_exact_p(diffs: np.ndarray) -> tuple[float, float]:
    """Two-sided exact sign-flip permutation p-value for the signed-rank
    statistic. Zero differences are dropped; ties get average ranks.

    Returns (p_value, W+). Uses the full 2^n distribution via a
    count-vector convolution over doubled (hence integral) ranks, so it is
    exact for any n the caller throws at it.
    """
    diffs = np.asarray(diffs, dtype=np.float64)
    diffs = diffs[diffs != 0]
    n = len(diffs)
    if n == 0:
        return 1.0, 0.0
    ranks = rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())

    # distribution of 2*W+ over all sign assignments
    ranks2 = np.round(2 * ranks).astype(np.int64)
    total = int(ranks2.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in ranks2:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: total + 1 - r]
        dist = dist + shifted
    dist /= 2.0**n

    mu = total / 2.0
    obs_dev = abs(2 * w_plus - mu)
    support_dev = np.abs(np.arange(total + 1) - mu)
    p = float(dist[support_dev >= obs_dev - 1e-9].sum())
    return min(1.0, p), w_plus


def significance(
    baseline: np.ndarray, variant: np.ndarray, threshold: float = 0.05
) -> SignificanceResult:
    """Paired two-sided signed-rank test of variant vs. baseline replicates.

    The flag requires both an improvement in the mean and p below the
    threshold.
    """
    baseline = np.asarray(baseline, dtype=np.float64)
    variant = np.asarray(variant, dtype=np.float64)
    if baseline.shape != variant.shape:
        raise ValueError(f"paired samples differ in length: {baseline.shape} vs {variant.shape}")
    p, w_plus = wilcoxon_exact_p(variant - baseline)
    improved = float(variant.mean()) > float(baseline.mean())
    return SignificanceResult(p_value=p, statistic=w_plus, significant=improved and p < threshold)
