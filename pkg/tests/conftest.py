from fractions import Fraction

import numpy as np
import pytest

from fiber_atlas import build_bundle


@pytest.fixture(scope="session")
def bundle():
    return build_bundle()


@pytest.fixture(scope="session")
def g_poly(bundle):
    return bundle.g


def circle_points(n, radius=1.0, seed=None):
    if seed is None:
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    else:
        t = np.sort(np.random.default_rng(seed).uniform(0, 2 * np.pi, n))
    return radius * np.c_[np.cos(t), np.sin(t)]
