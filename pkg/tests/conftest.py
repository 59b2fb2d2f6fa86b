import numpy as np
import pytest

from attnalign.corpus import SyntheticSpec, generate_synthetic
from attnalign.model import ModelConfig, TrainConfig
from attnalign.tokenizer import train_vocab


@pytest.fixture(scope="session")
def small_docs():
    return generate_synthetic(SyntheticSpec(n_docs=160, seed=11))


@pytest.fixture(scope="session")
def small_vocab(small_docs):
    return train_vocab([d.text for d in small_docs], target_size=120)


@pytest.fixture
def tiny_model_config(small_vocab):
    return ModelConfig(
        vocab_size=len(small_vocab), n_layers=2, n_heads=2, d_model=16, d_ff=32, max_len=40
    )


@pytest.fixture
def fast_train_config():
    return TrainConfig(epochs=2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
