import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tropnet.counters import counting
from tropnet.errors import DimensionError, DomainError
from tropnet.linalg import trop_identity
from tropnet.network import (
    Approximator,
    ClassicalUnit,
    Layer,
    LayeredNetwork,
    TropicalUnit,
    approx_eval,
    approx_fit,
    dequantize_unit,
    network_forward,
    unit_forward_classical,
    unit_forward_tropical,
)
from tropnet.semiring import NEG_INF, dequantize


def test_classical_unit_examples():
    assert unit_forward_classical(ClassicalUnit(0, [1]), [-2]) == 0
    assert unit_forward_classical(ClassicalUnit(1, [2, 3]), [1, 1]) == 6
    assert unit_forward_classical(ClassicalUnit(0, [0, 0, 0]), [4, -1, 9]) == 0
    with pytest.raises(DimensionError):
        unit_forward_classical(ClassicalUnit(0, [1]), [1, 2])


def test_tropical_unit_examples():
    u = TropicalUnit(0, [0])
    for t in (-3.0, 0.0, 2.5):
        assert unit_forward_tropical(u, [t]) == max(0.0, t)
    assert unit_forward_tropical(TropicalUnit(NEG_INF, [0, 0]), [1, 5]) == 5
    assert unit_forward_tropical(TropicalUnit(7, [NEG_INF, NEG_INF]), [100, -3]) == 7
    with pytest.raises(DomainError):
        TropicalUnit(NEG_INF, [NEG_INF])


def test_tropical_unit_has_no_multiplications():
    with counting() as c:
        unit_forward_tropical(TropicalUnit(0.5, [1.0, -2.0, 0.0]), [0.1, 0.2, 0.3])
    assert c.mults == 0 and c.adds == 3 and c.comparisons == 3


@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.integers(0, 2),
    st.floats(0, 3),
)
def test_tropical_unit_monotone(a, x, k, bump):
    u = TropicalUnit(0.0, a)
    y = list(x)
    y[k] += bump
    assert unit_forward_tropical(u, y) >= unit_forward_tropical(u, x)


def test_dequantize_unit_examples():
    t = dequantize_unit(ClassicalUnit(10, [100]), 10)
    assert t.bias == pytest.approx(1) and t.weights[0] == pytest.approx(2)
    t = dequantize_unit(ClassicalUnit(1, [1, 1]), 37.0)
    assert t.bias == 0 and np.all(t.weights == 0)
    with pytest.raises(DomainError):
        dequantize_unit(ClassicalUnit(1, [0.0, 2.0]), 10)
    with pytest.raises(DomainError):
        dequantize_unit(ClassicalUnit(-1, [1.0]), 10)


@pytest.mark.parametrize("h", [10.0, 1000.0])
def test_log_log_conjugation(h, rng):
    n = 3
    for _ in range(100):
        u = ClassicalUnit(rng.uniform(0.1, 5), rng.uniform(0.1, 5, n))
        x = rng.uniform(0.01, 50, n)
        lhs = math.log(unit_forward_classical(u, x), h)
        tu = dequantize_unit(u, h)
        logx = dequantize(x, h)
        # at the same finite h the log-log graph is reproduced exactly
        assert abs(lhs - unit_forward_tropical(tu, logx, h)) <= 1e-9
        # the max-plus unit is within log_h(n + 1) of it
        gap = lhs - unit_forward_tropical(tu, logx)
        assert -1e-12 <= gap <= math.log(n + 1, h) + 1e-12


def test_conjugation_gap_shrinks_with_hbar(rng):
    u = ClassicalUnit(2.0, [3.0, 0.5])
    x = np.array([1.5, 4.0])
    gaps = []
    for h in (10.0, 100.0, 1e4, 1e8):
        lhs = math.log(unit_forward_classical(u, x), h)
        gaps.append(lhs - unit_forward_tropical(dequantize_unit(u, h), dequantize(x, h)))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.1


def test_forward_identity_examples():
    net = LayeredNetwork([Layer(np.eye(2), [0, 0], "relu")])
    np.testing.assert_array_equal(network_forward(net, [-1, 2]), [0, 2])
    tnet = LayeredNetwork([Layer(trop_identity(3).array, [NEG_INF] * 3)], "tropical")
    x = np.array([0.5, -2.0, 7.0])
    np.testing.assert_array_equal(network_forward(tnet, x), x)


def max_net():
    # max(a, b) = a + relu(b - a), with a = relu(a) - relu(-a)
    hidden = Layer([[-1, 1, -1], [1, 0, 0]], [0, 0, 0], "relu")
    out = Layer([[1], [1], [-1]], [0], "identity")
    return LayeredNetwork([hidden, out])


def test_two_layer_max_network(rng):
    net = max_net()
    X = rng.uniform(-10, 10, (100, 2))
    np.testing.assert_allclose(network_forward(net, X)[:, 0], X.max(axis=1), atol=1e-12)


def test_tropical_network_counts(rng):
    layers = [Layer(rng.uniform(-1, 1, (2, 4)), rng.uniform(-1, 1, 4)), Layer(rng.uniform(-1, 1, (4, 1)), [0.0])]
    net = LayeredNetwork(layers, "tropical")
    with counting() as c:
        network_forward(net, rng.uniform(-1, 1, (10, 2)))
    assert c.mults == 0
    assert c.adds == 10 * (2 * 4 + 4 * 1)


def test_network_dimension_errors():
    with pytest.raises(DimensionError):
        LayeredNetwork([Layer(np.ones((2, 3)), np.zeros(3)), Layer(np.ones((2, 1)), [0])])
    with pytest.raises(DimensionError):
        network_forward(max_net(), [1, 2, 3])
    with pytest.raises(DimensionError):
        Layer(np.ones((2, 3)), np.zeros(2))


def test_network_json_round_trip(rng):
    net = LayeredNetwork([Layer(rng.normal(size=(2, 3)), rng.normal(size=3)), Layer(rng.normal(size=(3, 1)), [0.1], "identity")])
    back = LayeredNetwork.loads(net.dumps())
    for a, b in zip(net.layers, back.layers):
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.bias, b.bias)
        assert a.activation == b.activation
    tnet = LayeredNetwork([Layer([[NEG_INF, 0.0]], [0.0, NEG_INF])], "tropical", 100.0)
    tback = LayeredNetwork.loads(tnet.dumps())
    assert tback.mode == "tropical" and tback.hbar.value == 100.0
    np.testing.assert_array_equal(tback.layers[0].weights, tnet.layers[0].weights)


def relu_unit(knot=0.0):
    return TropicalUnit(0.0, [-knot])


def test_approx_eval_examples():
    xs = np.linspace(-2, 3, 41)
    ap = Approximator([relu_unit()], [1.0])
    np.testing.assert_array_equal(approx_eval(ap, xs), np.maximum(xs, 0))
    ramp = Approximator([relu_unit(0), relu_unit(1)], [1.0, -1.0])
    np.testing.assert_allclose(approx_eval(ramp, xs), np.minimum(np.maximum(xs, 0), 1), atol=1e-15)
    zero = Approximator([relu_unit(0), relu_unit(1)], [0.0, 0.0])
    assert np.all(approx_eval(zero, xs) == 0)
    assert approx_eval(ap, 2.0) == 2.0


def test_approx_fit_examples():
    x = np.linspace(-1, 1, 201)
    _, r = approx_fit((x, np.maximum(0, x)), 2)
    assert r <= 1e-9
    _, r = approx_fit((x, np.abs(x)), 8)
    assert r <= 0.05
    x = np.linspace(0, 1, 201)
    ap, r = approx_fit((x, np.sin(np.pi * x)), 32)
    assert r <= 0.05
    assert len(ap.units) == 32
    # the reported residual is the true sup error on the samples
    assert r == pytest.approx(np.max(np.abs(approx_eval(ap, x) - np.sin(np.pi * x))), abs=1e-12)


def test_approx_fit_accepts_pairs_and_handles_rank_deficiency():
    samples = [(0.0, 1.0)] * 5 + [(1.0, 2.0)] * 5
    ap, r = approx_fit(samples, 4)
    assert r <= 1e-9
    assert approx_eval(ap, 0.0) == pytest.approx(1.0)


def test_approx_fit_errors():
    with pytest.raises(DimensionError):
        approx_fit((np.zeros(3), np.zeros(3)), 4)
    with pytest.raises(DomainError):
        approx_fit((np.zeros(3), np.zeros(3)), 0)


def test_approx_fit_2d_is_seeded(rng):
    X = rng.uniform(-1, 1, (300, 2))
    y = np.maximum(X[:, 0], X[:, 1])
    a1, r1 = approx_fit((X, y), 12, seed=5)
    a2, r2 = approx_fit((X, y), 12, seed=5)
    assert r1 == r2
    np.testing.assert_array_equal(a1.beta, a2.beta)
    assert r1 < 1.0


def test_approx_is_piecewise_linear_with_few_pieces(rng):
    x = np.linspace(-1, 1, 201)
    N = 8
    ap, _ = approx_fit((x, np.cos(3 * x)), N)
    knots = sorted(
        {float(u.bias - u.weights[0]) for u in ap.units if np.isfinite(u.bias) and np.isfinite(u.weights[0])}
    )
    assert len(knots) + 1 <= N + 1
    edges = [-1.0] + [k for k in knots if -1 < k < 1] + [1.0]
    for a, b in zip(edges, edges[1:]):
        t = np.linspace(a, b, 7)
        v = approx_eval(ap, t)
        # affine on each piece: second differences vanish
        assert np.max(np.abs(np.diff(v, 2))) < 1e-10
