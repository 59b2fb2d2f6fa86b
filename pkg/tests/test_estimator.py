import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from attnalign.estimator import AttentionSupervisedClassifier
from attnalign.experiments import prepare_items


@pytest.fixture(scope="module")
def data(small_docs, small_vocab):
    items = prepare_items(small_docs[:40], small_vocab)
    X = [it.sequence for it in items]
    y = np.array([it.label for it in items])
    attention = [it.attention for it in items]
    return X, y, attention, len(small_vocab)


def make_clf(vocab_size, **kw):
    defaults = dict(
        vocab_size=vocab_size, n_layers=1, n_heads=2, d_model=16, d_ff=32, max_len=40, epochs=2
    )
    defaults.update(kw)
    return AttentionSupervisedClassifier(**defaults)


def test_get_params_round_trips_through_clone(data):
    clf = make_clf(data[3], strategy="al", alpha=1.5)
    cloned = clone(clf)
    assert cloned.get_params() == clf.get_params()


def test_set_params(data):
    clf = make_clf(data[3])
    clf.set_params(alpha=3.0, strategy="ap")
    assert clf.alpha == 3.0 and clf.strategy == "ap"


def test_predict_before_fit_raises(data):
    X, _, _, vocab_size = data
    with pytest.raises(NotFittedError):
        make_clf(vocab_size).predict(X)


def test_fit_predict_shapes(data):
    X, y, _, vocab_size = data
    clf = make_clf(vocab_size).fit(X, y)
    proba = clf.predict_proba(X)
    assert proba.shape == (len(X), 2)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)
    preds = clf.predict(X)
    assert set(np.unique(preds)) <= {0, 1}
    np.testing.assert_array_equal(clf.classes_, [0, 1])


def test_fit_with_attention_strategy(data):
    X, y, attention, vocab_size = data
    clf = make_clf(vocab_size, strategy="al").fit(X, y, human_attention=attention)
    assert clf.strategy_config_.kind == "al"
    assert len(clf.history_.epochs) == 2
    pred, trace, hidden = clf.forward(X[0])
    assert trace.rows.shape[0] == clf.n_layers


def test_input_validation(data):
    X, y, _, vocab_size = data
    clf = make_clf(vocab_size)
    with pytest.raises(ValueError):
        clf.fit([], y)
    with pytest.raises(TypeError):
        clf.fit(["not a sequence"], np.array([0]))
    with pytest.raises(ValueError):
        clf.fit(X, y[:-1])
    with pytest.raises(ValueError):
        clf.fit(X, np.full(len(X), 2))


def test_seeded_fits_agree(data):
    X, y, _, vocab_size = data
    a = make_clf(vocab_size, seed=7).fit(X, y).predict_proba(X)
    b = make_clf(vocab_size, seed=7).fit(X, y).predict_proba(X)
    np.testing.assert_array_equal(a, b)
