import math

import numpy as np
import pytest
from hypothesis import strategies as st

from tropnet.datasets import two_blobs
from tropnet.polynomial import TropicalPolynomial

NEG_INF = float("-inf")

finite = st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False)
tropical = st.one_of(finite, st.just(NEG_INF))


def close(a, b, tol):
    """Elementwise equality up to ``tol``, with -inf only matching -inf."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    both = np.isneginf(a) & np.isneginf(b)
    with np.errstate(invalid="ignore"):
        ok = np.abs(a - b) <= tol
    return bool(np.all(both | ok))


DYADIC = 2.0**-20  # sums of a few such values are exact in double precision

dyadic = st.integers(-100 * 2**20, 100 * 2**20).map(lambda k: k * DYADIC)
dyadic_tropical = st.one_of(dyadic, st.just(NEG_INF))


def random_tropical(rng, shape, p_neg_inf=0.15, lo=-10, hi=10, exact=True):
    """Random entries in [lo, hi] u {-inf}; on the dyadic grid when ``exact``."""
    a = rng.uniform(lo, hi, shape)
    if exact:
        a = np.round(a / DYADIC) * DYADIC
    a[rng.random(shape) < p_neg_inf] = NEG_INF
    return a


@pytest.fixture
def rng():
    return np.random.default_rng(20161209)


@pytest.fixture
def tropical_line():
    return TropicalPolynomial([(0, [1, 0]), (0, [0, 1]), (0, [0, 0])])


@pytest.fixture
def blobs():
    return two_blobs(200, seed=3)


@pytest.fixture
def blobs_csv(tmp_path, blobs):
    from tropnet.formats import write_dataset

    path = tmp_path / "blobs.csv"
    write_dataset(str(path), *blobs)
    return path


def random_smooth_net(rng, max_layers=3, max_width=4, margin=1e-2):
    """Small ReLU net and input whose hidden pre-activations all avoid the kink."""
    from tropnet.network import Layer, LayeredNetwork, forward_trace

    while True:
        depth = int(rng.integers(2, max_layers + 1))
        sizes = [int(s) for s in rng.integers(1, max_width + 1, depth + 1)]
        layers = [
            Layer(rng.uniform(-1, 1, (a, b)), rng.uniform(-1, 1, b), "relu" if j < depth - 1 else "identity")
            for j, (a, b) in enumerate(zip(sizes[:-1], sizes[1:]))
        ]
        net = LayeredNetwork(layers)
        x = rng.uniform(-1, 1, sizes[0])
        tr = forward_trace(net, x)
        if all(np.min(np.abs(p)) > margin for p in tr.pre[:-1]):
            return net, x, rng.uniform(-1, 1, sizes[-1])


def gradient_vs_finite_differences(net, x, y, step=1e-4):
    """Delta-chain gradients and central differences of E = 0.5 |net(x) - y|^2.

    Returns two flat arrays (analytic, finite difference) over all weights.
    Away from kinks E is quadratic in each single weight, so central
    differences are exact up to rounding.
    """
    from tropnet.network import forward_trace, network_forward
    from tropnet.training import classical_delta, derivative_diagonal

    tr = forward_trace(net, x)
    e = tr.output[0] - y
    diags = [derivative_diagonal(p[0]) for p in tr.pre[:-1]]
    W = net.weights
    L = len(W)
    grads = []
    for k in range(L):
        delta = e if k == L - 1 else classical_delta(W, diags, e, k)
        grads.append(np.outer(tr.inputs[k][0], delta))

    def E(n):
        return 0.5 * float(np.sum((network_forward(n, x) - y) ** 2))

    analytic, numeric = [], []
    for k in range(L):
        for idx in np.ndindex(*W[k].shape):
            plus, minus = net.copy(), net.copy()
            plus.layers[k].weights[idx] += step
            minus.layers[k].weights[idx] -= step
            numeric.append((E(plus) - E(minus)) / (2 * step))
            analytic.append(grads[k][idx])
    return np.array(analytic), np.array(numeric)
