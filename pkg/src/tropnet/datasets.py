"""Small seeded synthetic datasets."""
from __future__ import annotations

import numpy as np


def two_blobs(n: int = 200, seed: int = 0, centers=((1.0, 1.0), (3.0, 3.0)), sigma: float = 0.4):
    """Two isotropic Gaussian blobs in the positive quadrant, labels 0 and 1.

    With the defaults the centres are ``2 * sqrt(2) / 0.4 ~ 7.1`` standard
    deviations apart.
    """
    rng = np.random.default_rng(seed)
    c = np.asarray(centers, dtype=float)
    half = n // 2
    X = np.vstack([rng.normal(c[0], sigma, (half, c.shape[1])), rng.normal(c[1], sigma, (n - half, c.shape[1]))])
    y = np.r_[np.zeros(half, dtype=int), np.ones(n - half, dtype=int)]
    return X, y
