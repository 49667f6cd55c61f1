import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402


@pytest.fixture(scope="session")
def paper1d_oracle():
    """(x*, f*) for paper1d, recomputed by the brute-force routine."""
    xs, fs = oracles.brute_min_1d(lambda x: np.cos(x ** 2) + x / 5.0 + 1.0, 0.0, 5.0)
    assert abs(xs - oracles.PAPER1D_XSTAR) < 1e-9
    assert abs(fs - oracles.PAPER1D_FSTAR) < 1e-12
    return xs, fs


@pytest.fixture(scope="session")
def paper2d_oracle():
    """(x*, f*) for paper2d, recomputed by the zooming grid search."""
    def f2(p):
        return (np.cos(p[:, 0] ** 2) + np.cos(p[:, 1] ** 2)
                + p[:, 0] / 5.0 + p[:, 1] / 5.0 + 2.0)
    x2, fs2 = oracles.brute_min_nd(f2, [0.0, 0.0], [3.5, 3.5])
    assert abs(fs2 - oracles.PAPER2D_FSTAR) < 1e-10
    return x2, fs2
