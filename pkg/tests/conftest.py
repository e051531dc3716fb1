import random

import pytest

from cross_sdp import config as config_module


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def fresh_config(monkeypatch):
    """Rebuild the global config after the test has patched the environment."""
    def build(**env):
        for name, value in env.items():
            monkeypatch.setenv(name, str(value))
        return config_module.reload_config()
    yield build
    monkeypatch.undo()
    config_module.reload_config()
