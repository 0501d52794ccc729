import pytest
import torch

from evlearn import JointModel, ModelConfig


@pytest.fixture
def tiny_config():
    return ModelConfig(height=24, width=24, base_width=8,
                       k0=64, k1=64, k2=64)


@pytest.fixture
def tiny_model(tiny_config):
    torch.manual_seed(0)
    return JointModel(tiny_config)
