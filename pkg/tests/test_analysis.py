import numpy as np
import pytest

from attnalign import analysis
from attnalign.model import EpochRecord, TrainingHistory
from attnalign.smoothing import lowess


def test_token_to_word_sums_subword_mass():
    att = np.array([0.1, 0.2, 0.3, 0.4])  # index 0 is the classifier slot
    out = analysis.token_to_word(att, [(1, 3), (3, 4)])
    np.testing.assert_allclose(out, [0.5 / 0.9, 0.4 / 0.9])


def test_token_to_word_renormalizes():
    out = analysis.token_to_word(np.array([0.5, 0.25, 0.25]), [(1, 2), (2, 3)])
    assert out.sum() == pytest.approx(1.0)


def test_token_to_word_rejects_uncovered_positions():
    with pytest.raises(ValueError, match="uncovered"):
        analysis.token_to_word(np.array([0.1, 0.2, 0.3, 0.4]), [(1, 3)])
    with pytest.raises(ValueError, match="gap"):
        analysis.token_to_word(np.array([0.1, 0.2]), [(1, 1)])


def test_binarize_mean_sigma_rule():
    vals = np.array([0.1, 0.1, 0.1, 0.9])
    mask = analysis.binarize(vals, rule="mean_sigma")
    cut = vals.mean() + vals.std()
    np.testing.assert_array_equal(mask.mask, (vals > cut).astype(int))
    assert mask.high_attention_fraction == pytest.approx(mask.mask.mean())


def test_binarize_iqr_rule():
    vals = np.array([0.1, 0.11, 0.12, 0.13, 5.0])
    mask = analysis.binarize(vals, rule="iqr")
    assert mask.mask[-1] == 1
    assert mask.mask[:-1].sum() == 0


def test_binarize_rejects_short_or_unknown():
    with pytest.raises(ValueError):
        analysis.binarize(np.array([1.0]))
    with pytest.raises(ValueError, match="rule"):
        analysis.binarize(np.ones(3), rule="topk")


def test_positional_profile_localizes_mass():
    masks = [np.array([1, 0, 0, 0, 0])] * 10
    profile = analysis.positional_profile(masks, bins=5)
    assert profile.values[0] == 1.0
    assert profile.values[1:].sum() == 0.0


def test_positional_profile_skips_single_word_docs():
    profile = analysis.positional_profile([np.array([1]), np.array([1, 0])], bins=2)
    assert profile.values[0] == 1.0


def test_positional_profile_empty_input():
    with pytest.raises(ValueError):
        analysis.positional_profile([])


def test_positional_profile_table_and_csv(tmp_path):
    profile = analysis.positional_profile([np.array([1, 0, 1, 0])], bins=4)
    table = profile.to_table()
    assert len(table) == 4
    path = tmp_path / "profile.csv"
    analysis.write_profile_csv(profile, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "bin_center,value"
    assert len(lines) == 5


def test_cosine_table_statistics():
    human = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    machine = {"al": [np.array([1.0, 0.0]), np.array([0.0, 1.0])], "baseline": [np.array([0.0, 1.0]), np.array([1.0, 0.0])]}
    table = analysis.cosine_table(human, machine)
    assert table["al"][0] == pytest.approx(1.0)
    assert table["baseline"][0] == pytest.approx(0.0)


def test_cosine_table_zero_vector_warns(caplog):
    with caplog.at_level("WARNING"):
        table = analysis.cosine_table([np.zeros(2)], {"al": [np.ones(2)]})
    assert table["al"][0] == 0.0


def _history(rows):
    return TrainingHistory(
        epochs=[EpochRecord(epoch=i, total_loss=t, ce_loss=c, attn_loss=a, train_auc=0.5) for i, (t, c, a) in enumerate(rows)]
    )


def test_loss_report_checks_additivity_and_monotonicity():
    alpha = 2.0
    rows = [(1.0 + alpha * 0.5, 1.0, 0.5), (0.9 + alpha * 0.4, 0.9, 0.4)]
    report = analysis.loss_report(_history(rows), alpha)
    assert report.additivity_ok
    assert report.attention_nonincreasing


def test_loss_report_flags_attention_increase():
    alpha = 1.0
    rows = [(1.3, 1.0, 0.3), (1.9, 1.0, 0.9)]
    report = analysis.loss_report(_history(rows), alpha)
    assert not report.attention_nonincreasing


def test_loss_report_tolerates_small_wobble():
    alpha = 1.0
    rows = [(1.3, 1.0, 0.3), (1.3005, 1.0, 0.3005)]
    report = analysis.loss_report(_history(rows), alpha, tolerance=1e-3)
    assert report.attention_nonincreasing


def test_loss_report_empty_history():
    with pytest.raises(ValueError):
        analysis.loss_report(TrainingHistory(), alpha=1.0)


def test_lowess_reproduces_straight_lines():
    x = np.linspace(0, 10, 25)
    y = 3.0 * x - 2.0
    np.testing.assert_allclose(lowess(x, y, frac=0.4), y, atol=1e-8)


def test_lowess_resists_an_outlier():
    x = np.linspace(0, 10, 30)
    y = x.copy()
    y[15] += 50.0
    plain = lowess(x, y, frac=0.5, robust_iters=0)
    robust = lowess(x, y, frac=0.5, robust_iters=2)
    assert abs(robust[15] - x[15]) < abs(plain[15] - x[15])
    assert abs(robust[15] - x[15]) < 1.0


def test_lowess_degenerate_inputs():
    assert lowess([], []).size == 0
    np.testing.assert_array_equal(lowess([1.0], [2.0]), [2.0])
    tied = lowess([1.0, 1.0, 1.0], [2.0, 2.0, 4.0])
    assert np.isfinite(tied).all()
    assert ((tied >= 2.0) & (tied <= 4.0)).all()
