"""Shared fixtures and the finite-difference gradient oracle."""

import numpy as np
import pytest

from legnn import build_graph, gen_sbm, normalize
from legnn.nn import GcnModel


@pytest.fixture
def path_graph():
    """0 - 1 - 2 path (plus self-loops)."""
    return build_graph([(0, 1), (1, 2)], 3)


@pytest.fixture
def triangle_graph():
    return build_graph([(0, 1), (1, 2), (0, 2)], 3)


@pytest.fixture(scope="session")
def small_sbm():
    """60-node, 3-class planted partition used by several suites."""
    return gen_sbm(3, 20, 0.2, 0.02, 8, 2.0, seed=5)


def make_model(d, h, C, seed=0, **hyper):
    return GcnModel.initialize(d, h, C, np.random.default_rng(seed), **hyper)


def finite_difference(loss_of_model, model, eps=1e-5):
    """Central finite differences of a scalar loss w.r.t. W1 and W2."""
    grads = []
    for W in (model.W1, model.W2):
        g = np.zeros_like(W)
        it = np.nditer(W, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = W[idx]
            W[idx] = orig + eps
            hi = loss_of_model(model)
            W[idx] = orig - eps
            lo = loss_of_model(model)
            W[idx] = orig
            g[idx] = (hi - lo) / (2 * eps)
        grads.append(g)
    return grads


def max_rel_error(analytic, numeric):
    num = np.abs(analytic - numeric)
    den = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float((num / den).max())


@pytest.fixture
def normalized_path(path_graph):
    return normalize(path_graph)
