import numpy as np
import pytest


class ScriptedRng:
    """Stand-in generator returning a scripted sequence of uniforms.

    Lets a test force a specific basis choice or measurement branch.
    """

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)

    def integers(self, low, high=None, size=None):
        value = self.values.pop(0)
        if size is not None:
            raise NotImplementedError("scripted draws are scalar")
        return int(value)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scripted():
    return ScriptedRng
