import numpy as np
import pytest

from sdfguard.adversary import AttackConfig
from sdfguard.synth_data import DataConfig, generate_dataset
from sdfguard.training import TrainConfig, train_loop

# plain supervised training (no attack), used wherever a trained toy model is needed
UNDEFENDED = TrainConfig(lr0=0.1, step_period=10**6, total_steps=4000, batch_size=16, mode="standard",
                         optimizer="sgd", seed=0, attack=AttackConfig(steps=0))


@pytest.fixture(scope="session")
def shapes_data():
    return generate_dataset(DataConfig(n_train=1000, n_test=200, seed=0))


@pytest.fixture(scope="session")
def undefended_model(shapes_data):
    train, _ = shapes_data
    params, _ = train_loop(train, UNDEFENDED)
    return params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
