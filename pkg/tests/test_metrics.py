import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import wilcoxon

from attnalign.metrics import auc, significance, wilcoxon_exact_p


def brute_force_auc(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else (0.5 if p == q else 0.0)
    return total / (len(pos) * len(neg))


def test_auc_perfect_separation():
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0


def test_auc_reversed_separation():
    assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0


def test_auc_ties_count_half():
    assert auc([0.5, 0.5], [0, 1]) == 0.5


def test_auc_single_class_raises():
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


@given(
    st.integers(2, 40).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(0, 10), min_size=n, max_size=n),
            st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda ls: 0 < sum(ls) < n),
        )
    )
)
@settings(max_examples=150, deadline=None)
def test_auc_matches_pairwise_counting(case):
    scores, labels = case
    assert auc(scores, labels) == pytest.approx(brute_force_auc(scores, labels), abs=1e-12)


def test_wilcoxon_all_zero_differences():
    p, w = wilcoxon_exact_p(np.zeros(5))
    assert p == 1.0 and w == 0.0


def test_wilcoxon_uniform_positive_differences():
    p, _ = wilcoxon_exact_p(np.ones(20) * 0.3)
    # all 20 signs positive: the two-sided tail holds only the two extremes
    assert p == pytest.approx(2 * 2.0**-20, rel=1e-9)


def test_wilcoxon_matches_scipy_exact():
    rng = np.random.default_rng(4)
    for _ in range(10):
        diffs = rng.normal(0.1, 1.0, size=12)
        diffs = diffs[diffs != 0]
        expected = wilcoxon(diffs, mode="exact", zero_method="wilcox").pvalue
        got, _ = wilcoxon_exact_p(diffs)
        assert got == pytest.approx(expected, abs=1e-10)


def test_wilcoxon_handles_tied_magnitudes():
    diffs = np.array([1.0, -1.0, 2.0, 2.0, 3.0])
    p, w = wilcoxon_exact_p(diffs)
    assert 0.0 < p <= 1.0
    # average ranks: |1| -> 1.5 each, |2| -> 3.5 each, |3| -> 5
    assert w == pytest.approx(1.5 + 3.5 + 3.5 + 5.0)


def test_significance_requires_improvement_and_p():
    base = np.linspace(0.5, 0.6, 20)
    better = base + 0.05
    worse = base - 0.05
    assert significance(base, better).significant
    res = significance(base, worse)
    assert not res.significant and res.p_value < 0.05


def test_significance_identical_samples():
    base = np.full(10, 0.7)
    res = significance(base, base.copy())
    assert res.p_value == 1.0 and not res.significant


def test_significance_length_mismatch():
    with pytest.raises(ValueError):
        significance(np.zeros(3), np.zeros(4))
