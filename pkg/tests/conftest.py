"""Shared fixtures and oracles for the test suite."""

import numpy as np
import pytest

from costforest import CostedDataset


def strict_random_dataset(rng, n, k, binaryish=False):
    """Random dataset with strictly reasonable costs."""
    if binaryish:
        X = rng.integers(0, 2, size=(n, k)).astype(float)
    else:
        X = rng.normal(size=(n, k))
    y = rng.integers(0, 2, size=n)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    c_tp = rng.uniform(0, 2, n)
    c_tn = rng.uniform(0, 2, n)
    c_fn = c_tp + rng.uniform(0.5, 20, n)
    c_fp = c_tn + rng.uniform(0.5, 20, n)
    return CostedDataset(X, y, np.column_stack([c_tp, c_fp, c_fn, c_tn]))


def four_example_set():
    """Labels (0,0,1,1), shared costs (tp=0, fp=5, fn=10, tn=0), feature 1..4."""
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0, 0, 1, 1])
    costs = np.tile([0.0, 5.0, 10.0, 0.0], (4, 1))
    return CostedDataset(X, y, costs)


def gaussian_cost_dataset(rng, n, k=10, shift=1.2, amount_sigma=1.0, admin=3.0):
    """Two overlapping Gaussian classes with fraud-style lognormal costs."""
    y = (rng.random(n) < 0.3).astype(int)
    X = rng.normal(size=(n, k)) + shift * y[:, None]
    amounts = rng.lognormal(mean=3.0, sigma=amount_sigma, size=n)
    amounts = np.maximum(amounts, admin + 0.5)  # keep strict reasonableness
    costs = np.column_stack(
        [np.full(n, admin), np.full(n, admin), amounts, np.zeros(n)]
    )
    return CostedDataset(X, y, costs)


@pytest.fixture
def four_examples():
    return four_example_set()
