import numpy as np
import pytest
from scipy.linalg import orthogonal_procrustes

from triadscale import (
    NoisyObserver,
    ScalingFunctionSpec,
    TripletResponse,
    enumerate_universe,
    stimulus_grid,
)


def noiseless_responses(points, triplets):
    """Answer triplets exactly from a ground-truth point configuration."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1:
        pts = pts.T
    out = []
    for t in triplets:
        d1 = np.linalg.norm(pts[t.ref] - pts[t.opt1])
        d2 = np.linalg.norm(pts[t.ref] - pts[t.opt2])
        out.append(TripletResponse(t, +1 if d1 < d2 else -1))
    return out


def procrustes_residual(estimated, truth):
    """Relative residual after the best similarity transform."""
    a = estimated - estimated.mean(axis=0)
    b = truth - truth.mean(axis=0)
    rot, scale_num = orthogonal_procrustes(a, b)
    s = scale_num / (np.linalg.norm(a) ** 2)
    return np.linalg.norm(s * a @ rot - b) / np.linalg.norm(b)


@pytest.fixture
def sigmoid_spec():
    return ScalingFunctionSpec("sigmoid")


@pytest.fixture
def monotone_observer_n8(sigmoid_spec):
    return NoisyObserver(sigmoid_spec, sigma=0.0, seed=0), stimulus_grid(8), enumerate_universe(8, "mlds_valid")
