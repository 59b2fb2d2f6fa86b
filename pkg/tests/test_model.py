import numpy as np
import pytest

from attnalign import model as M
from attnalign.model import ModelConfig, TrainConfig
from attnalign.strategies import StrategyConfig
from attnalign.tokenizer import subword_tokenize


@pytest.fixture
def items(small_docs, small_vocab):
    from attnalign.experiments import prepare_items

    return prepare_items(small_docs[:40], small_vocab)


def test_config_validation(small_vocab):
    with pytest.raises(ValueError):
        ModelConfig(vocab_size=10, d_model=10, n_heads=4)
    with pytest.raises(ValueError):
        ModelConfig(vocab_size=10, n_layers=0)
    with pytest.raises(ValueError):
        ModelConfig(vocab_size=10, d_model=8, n_heads=2, attn_temperature=0.0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)


def test_init_is_seeded(tiny_model_config):
    a = M.init_params(tiny_model_config)
    b = M.init_params(tiny_model_config)
    for k in a:
        np.testing.assert_array_equal(a[k].data, b[k].data)


def test_init_head_is_zero(tiny_model_config):
    p = M.init_params(tiny_model_config)
    assert (p["cls_w"].data == 0).all()
    assert (p["cls_b"].data == 0).all()


def test_untrained_model_is_indifferent(items, tiny_model_config):
    p = M.init_params(tiny_model_config)
    pred, _, _ = M.forward(items[0].sequence, p, tiny_model_config)
    assert pred.prob_positive == pytest.approx(0.5)


def test_forward_shapes_and_attention_rows(items, tiny_model_config):
    p = M.init_params(tiny_model_config)
    seq = items[0].sequence
    pred, trace, hidden = M.forward(seq, p, tiny_model_config)
    cfg = tiny_model_config
    assert pred.logits.shape == (2,)
    assert trace.rows.shape == (cfg.n_layers, cfg.n_heads, len(seq))
    np.testing.assert_allclose(trace.rows.sum(axis=-1), 1.0, atol=1e-9)
    assert len(hidden.states) == cfg.n_layers
    assert hidden.states[0].shape == (len(seq), cfg.d_model)


def test_head_average_sums_to_one(items, tiny_model_config):
    p = M.init_params(tiny_model_config)
    _, trace, _ = M.forward(items[0].sequence, p, tiny_model_config)
    avg = M.head_average(trace, tiny_model_config.n_layers - 1)
    assert avg.sum() == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(IndexError):
        M.head_average(trace, 5)


def test_sharper_temperature_preserves_initial_diffuseness(items, small_vocab):
    base = ModelConfig(vocab_size=len(small_vocab), n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=40)
    sharp = ModelConfig(
        vocab_size=len(small_vocab), n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=40,
        attn_temperature=0.01,
    )
    seq = items[0].sequence
    _, t_base, _ = M.forward(seq, M.init_params(base), base)
    _, t_sharp, _ = M.forward(seq, M.init_params(sharp), sharp)
    # entropy of the initial attention should stay in the same ballpark
    def mean_entropy(rows):
        p = np.clip(rows, 1e-12, None)
        return float(-(p * np.log(p)).sum(axis=-1).mean())

    assert mean_entropy(t_sharp.rows) > 0.8 * mean_entropy(t_base.rows)


def test_predict_proba_matches_single_forward(items, tiny_model_config):
    p = M.init_params(tiny_model_config)
    seqs = [it.sequence for it in items[:7]]
    batched = M.predict_proba(seqs, p, tiny_model_config)
    singles = [M.forward(s, p, tiny_model_config)[0].prob_positive for s in seqs]
    np.testing.assert_allclose(batched, singles, atol=1e-9)


def test_sequence_longer_than_max_len_rejected(items, small_vocab):
    cfg = ModelConfig(vocab_size=len(small_vocab), d_model=16, n_heads=2, d_ff=32, max_len=4)
    p = M.init_params(cfg)
    with pytest.raises(ValueError, match="max_len"):
        M.forward(items[0].sequence, p, cfg)


def test_fit_is_deterministic(items, tiny_model_config, fast_train_config):
    seqs = [it.sequence for it in items]
    labels = np.array([it.label for it in items])
    runs = []
    for _ in range(2):
        params, history = M.fit(seqs, labels, StrategyConfig("baseline"), tiny_model_config, fast_train_config)
        runs.append((params, history))
    for k in runs[0][0]:
        np.testing.assert_array_equal(runs[0][0][k].data, runs[1][0][k].data)
    assert [r.total_loss for r in runs[0][1].epochs] == [r.total_loss for r in runs[1][1].epochs]


def test_fit_records_history_and_decomposition(items, tiny_model_config, fast_train_config):
    seqs = [it.sequence for it in items]
    labels = np.array([it.label for it in items])
    atts = [it.attention for it in items]
    _, history = M.fit(
        seqs, labels, StrategyConfig("al", alpha=2.0), tiny_model_config, fast_train_config,
        human_attentions=atts,
    )
    assert len(history.epochs) == fast_train_config.epochs
    for rec in history.epochs:
        assert rec.total_loss == pytest.approx(rec.ce_loss + 2.0 * rec.attn_loss, abs=1e-12)
        assert 0.0 <= rec.train_auc <= 1.0


def test_fit_missing_attention_names_documents(items, tiny_model_config, fast_train_config):
    seqs = [it.sequence for it in items[:4]]
    labels = np.array([it.label for it in items[:4]])
    atts = [it.attention for it in items[:4]]
    atts[2] = np.zeros_like(atts[2])
    with pytest.raises(ValueError, match=items[2].doc_id):
        M.fit(
            seqs, labels, StrategyConfig("al"), tiny_model_config, fast_train_config,
            human_attentions=atts, doc_ids=[it.doc_id for it in items[:4]],
        )


def test_fit_empty_input(tiny_model_config, fast_train_config):
    with pytest.raises(ValueError):
        M.fit([], np.array([]), StrategyConfig("baseline"), tiny_model_config, fast_train_config)


def test_an_inference_uses_zero_sentinel(items, tiny_model_config, fast_train_config):
    seqs = [it.sequence for it in items]
    labels = np.array([it.label for it in items])
    atts = [it.attention for it in items]
    params, _ = M.fit(
        seqs, labels, StrategyConfig("an", alpha=2.0), tiny_model_config, fast_train_config,
        human_attentions=atts,
    )
    probs = M.predict_proba(seqs[:5], params, tiny_model_config, StrategyConfig("an", alpha=2.0))
    assert probs.shape == (5,)
    assert np.isfinite(probs).all()


def test_an_single_layer_pools_embedding_states(items, small_vocab, fast_train_config):
    cfg = ModelConfig(vocab_size=len(small_vocab), n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=40)
    seqs = [it.sequence for it in items[:12]]
    labels = np.array([it.label for it in items[:12]])
    atts = [it.attention for it in items[:12]]
    params, history = M.fit(
        seqs, labels, StrategyConfig("an"), cfg, fast_train_config, human_attentions=atts
    )
    assert len(history.epochs) == fast_train_config.epochs


def test_grad_check_runs_on_alignment_strategy(items, tiny_model_config):
    params = M.init_params(tiny_model_config)
    seqs = [it.sequence for it in items[:4]]
    ids, valid = M._pad_batch(seqs, tiny_model_config)
    labels = np.array([it.label for it in items[:4]])
    a_h = M._pad_attention([it.attention for it in items[:4]], ids.shape[1])
    err = M.grad_check(params, (ids, valid, labels, a_h), StrategyConfig("al"), tiny_model_config, n_samples=10)
    assert err < 1e-4


def test_grad_check_rejects_bad_eps(items, tiny_model_config):
    with pytest.raises(ValueError):
        M.grad_check(M.init_params(tiny_model_config), (None, None, None, None), StrategyConfig("baseline"), tiny_model_config, eps=0.0)


def test_checkpoint_round_trip(tmp_path, items, tiny_model_config):
    params = M.init_params(tiny_model_config)
    path = tmp_path / "model.npz"
    M.save_checkpoint(path, params, tiny_model_config)
    loaded, cfg = M.load_checkpoint(path)
    assert cfg == tiny_model_config
    for k in params:
        np.testing.assert_array_equal(params[k].data, loaded[k].data)
    seq = items[0].sequence
    a = M.forward(seq, params, tiny_model_config)[0].prob_positive
    b = M.forward(seq, loaded, cfg)[0].prob_positive
    assert a == b


def test_history_csv_round_trips_floats(tmp_path):
    hist = M.TrainingHistory(
        epochs=[M.EpochRecord(epoch=0, total_loss=1 / 3, ce_loss=0.1, attn_loss=0.2, train_auc=0.75)]
    )
    path = tmp_path / "history.csv"
    hist.save_csv(path)
    row = path.read_text().splitlines()[1].split(",")
    assert float(row[1]) == 1 / 3
