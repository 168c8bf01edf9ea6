import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


class StubRng:
    """Returns queued arrays from ``standard_normal`` / ``random`` calls."""

    def __init__(self, normals=None, uniforms=None):
        self.normals = list(normals or [])
        self.uniforms = list(uniforms or [])

    def standard_normal(self, size=None):
        return np.asarray(self.normals.pop(0), dtype=float).reshape(size if size is not None else ())

    def random(self, size=None):
        return np.asarray(self.uniforms.pop(0), dtype=float).reshape(size if size is not None else ())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
