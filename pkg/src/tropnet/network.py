"""ReLU units, their tropical degenerations, layered networks and approximators.

Weight matrices are stored ``(inputs, outputs)``; a layer maps a batch of row
vectors ``O`` to ``O W + b`` (classical) or ``O (x) W (+) b`` (tropical).  A
tropical layer is a row of tropical units ``max{b_j, max_i (w_ij + o_i)}``, so
the activation is built into the tropical affine map.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import counters as ops
from .errors import DimensionError, DomainError
from .linalg import format_matrix, parse_matrix, product_array, real_matmul
from .semiring import (
    NEG_INF,
    Hbar,
    HbarLike,
    as_hbar,
    dequantize,
    format_scalar,
    parse_scalar,
    t_add,
    t_sum,
)

__all__ = [
    "ClassicalUnit",
    "TropicalUnit",
    "Layer",
    "LayeredNetwork",
    "ForwardTrace",
    "Approximator",
    "unit_forward_classical",
    "unit_forward_tropical",
    "dequantize_unit",
    "network_forward",
    "forward_trace",
    "approx_eval",
    "approx_fit",
]

ACTIVATIONS = ("relu", "identity", "tropical")


def _vec(x, n: int | None = None, what: str = "input") -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionError(f"{what} must be a vector")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"{what} has length {v.shape[0]}, expected {n}")
    return v


@dataclass(frozen=True)
class ClassicalUnit:
    bias: float
    weights: np.ndarray

    def __post_init__(self):
        w = _vec(self.weights, what="weights")
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise DomainError("classical unit coefficients must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))


@dataclass(frozen=True)
class TropicalUnit:
    bias: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.array([parse_scalar(v) for v in np.atleast_1d(self.weights)], dtype=float)
        b = parse_scalar(self.bias)
        if b == NEG_INF and np.all(w == NEG_INF):
            raise DomainError("a tropical unit needs at least one finite coefficient")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    def to_dict(self) -> dict:
        return {"bias": format_scalar(self.bias), "weights": [format_scalar(v) for v in self.weights]}

    @classmethod
    def from_dict(cls, d: dict) -> "TropicalUnit":
        return cls(parse_scalar(d["bias"]), [parse_scalar(v) for v in d["weights"]])


def unit_forward_classical(u: ClassicalUnit, x) -> float:
    """``max{0, b + sum_i a_i x_i}``."""
    x = _vec(x, u.weights.shape[0])
    pre = float(u.bias)
    for a, xi in zip(u.weights, x):
        pre = float(ops.add(pre, ops.mul(a, xi)))
    return float(ops.maximum(0.0, pre))


def unit_forward_tropical(u: TropicalUnit, x, hbar: HbarLike = None) -> float:
    """``b (+) (+)_i (a_i (x) x_i)``; ``max{b, max_i(a_i + x_i)}`` in the limit."""
    x = _vec(x, u.weights.shape[0])
    terms = np.concatenate([[u.bias], ops.add(u.weights, x)])
    return float(t_sum(terms, hbar))


def dequantize_unit(u: ClassicalUnit, hbar: HbarLike) -> TropicalUnit:
    """Log-log image of a ReLU unit with strictly positive coefficients."""
    if u.bias <= 0 or np.any(u.weights <= 0):
        raise DomainError("dequantize_unit needs strictly positive bias and weights")
    return TropicalUnit(dequantize(u.bias, hbar), np.atleast_1d(dequantize(u.weights, hbar)))


@dataclass
class Layer:
    weights: np.ndarray  # (inputs, outputs)
    bias: np.ndarray  # (outputs,)
    activation: str = "relu"

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        self.bias = np.atleast_1d(np.asarray(self.bias, dtype=float))
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"unknown activation {self.activation!r}")
        if self.bias.shape != (self.weights.shape[1],):
            raise DimensionError(f"bias length {self.bias.shape} does not match {self.weights.shape[1]} outputs")

    @property
    def n_in(self) -> int:
        return self.weights.shape[0]

    @property
    def n_out(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "Layer":
        return Layer(self.weights.copy(), self.bias.copy(), self.activation)


@dataclass
class LayeredNetwork:
    """Stack of layers evaluated classically or over the h-semiring.

    ``mode="classical"``: ReLU hidden layers, any activation per layer.
    ``mode="tropical"``: every layer is a row of tropical units at ``hbar``.
    """

    layers: list[Layer]
    mode: str = "classical"
    hbar: Hbar = field(default=None)

    def __post_init__(self):
        if self.mode not in ("classical", "tropical"):
            raise DomainError(f"unknown network mode {self.mode!r}")
        self.hbar = as_hbar(self.hbar)
        if not self.layers:
            raise DimensionError("a network needs at least one layer")
        for k in range(1, len(self.layers)):
            if self.layers[k].n_in != self.layers[k - 1].n_out:
                raise DimensionError(
                    f"layer {k} expects {self.layers[k].n_in} inputs, previous layer gives {self.layers[k - 1].n_out}"
                )
        if self.mode == "tropical":
            for layer in self.layers:
                layer.activation = "tropical"

    @property
    def n_in(self) -> int:
        return self.layers[0].n_in

    @property
    def n_out(self) -> int:
        return self.layers[-1].n_out

    @property
    def weights(self) -> list[np.ndarray]:
        return [layer.weights for layer in self.layers]

    def copy(self) -> "LayeredNetwork":
        return LayeredNetwork([layer.copy() for layer in self.layers], self.mode, self.hbar)

    def __call__(self, x):
        return network_forward(self, x)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "hbar": None if self.hbar.is_infinite else self.hbar.value,
            "layers": [
                {
                    "activation": layer.activation,
                    "weights": format_matrix(layer.weights),
                    "bias": [format_scalar(v) for v in layer.bias],
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayeredNetwork":
        try:
            layers = [
                Layer(
                    parse_matrix(rec["weights"]).array.copy(),
                    [parse_scalar(v) for v in rec["bias"]],
                    rec.get("activation", "relu"),
                )
                for rec in d["layers"]
            ]
            return cls(layers, d.get("mode", "classical"), d.get("hbar"))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed network record: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "LayeredNetwork":
        return cls.from_dict(json.loads(text))


@dataclass
class ForwardTrace:
    """Per-layer quantities of a batched forward pass.

    ``inputs[k]`` feeds layer k; ``pre[k]`` is the affine part (classical
    ``O W + b``, tropical ``O (x) W`` without the bias); ``outputs[k]`` is
    the layer output.
    """

    inputs: list[np.ndarray]
    pre: list[np.ndarray]
    outputs: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]


def _batch(net: LayeredNetwork, x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    single = a.ndim <= 1
    a = np.atleast_2d(a)
    if a.shape[1] != net.n_in:
        raise DimensionError(f"input dimension {a.shape[1]} does not match network input {net.n_in}")
    return a, single


def forward_trace(net: LayeredNetwork, X) -> ForwardTrace:
    O, _ = _batch(net, X)
    inputs, pre, outs = [], [], []
    for layer in net.layers:
        inputs.append(O)
        if net.mode == "classical":
            Z = ops.add(real_matmul(O, layer.weights), layer.bias)
            if layer.activation == "relu":
                O = ops.maximum(Z, 0.0)
            elif layer.activation == "identity":
                O = Z
            else:
                raise DomainError("tropical activation inside a classical network")
        else:
            Z = product_array(O, layer.weights, net.hbar)
            O = np.asarray(t_add(Z, layer.bias, net.hbar))
        pre.append(np.asarray(Z))
        outs.append(np.asarray(O))
    return ForwardTrace(inputs, pre, outs)


def network_forward(net: LayeredNetwork, x) -> np.ndarray:
    """Output vector for one input, or ``(batch, outputs)`` for a batch."""
    _, single = _batch(net, x)
    out = forward_trace(net, x).output
    return out[0] if single else out


@dataclass
class Approximator:
    """``F(x) = sum_i beta_i * sigma_tr_i(x)`` with classical outer coefficients."""

    units: list[TropicalUnit]
    beta: np.ndarray

    def __post_init__(self):
        self.beta = _vec(self.beta, what="beta")
        if len(self.units) != self.beta.shape[0]:
            raise DimensionError("beta must have one coefficient per unit")
        if not self.units:
            raise DimensionError("an approximator needs at least one unit")
        n = {u.weights.shape[0] for u in self.units}
        if len(n) != 1:
            raise DimensionError("all units must share the input dimension")

    @property
    def n_in(self) -> int:
        return self.units[0].weights.shape[0]

    def __call__(self, x):
        return approx_eval(self, x)

    def design_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        X = X.reshape(-1, 1) if X.ndim <= 1 and self.n_in == 1 else np.atleast_2d(X)
        if X.shape[1] != self.n_in:
            raise DimensionError(f"input dimension {X.shape[1]} does not match approximator input {self.n_in}")
        B = np.array([u.bias for u in self.units])
        A = np.array([u.weights for u in self.units])  # (N, n)
        # max{b_i, max_d(a_id + x_d)} for every sample and unit
        return np.maximum(B[None, :], (A[None, :, :] + X[:, None, :]).max(axis=2))

    def to_dict(self) -> dict:
        return {"units": [u.to_dict() for u in self.units], "beta": [format_scalar(b) for b in self.beta]}

    @classmethod
    def from_dict(cls, d: dict) -> "Approximator":
        return cls([TropicalUnit.from_dict(u) for u in d["units"]], [parse_scalar(b) for b in d["beta"]])


def approx_eval(ap: Approximator, x):
    """Evaluate at one point (returns float) or a batch (returns array)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and ap.n_in > 1)
    G = ap.design_matrix(x)
    with np.errstate(invalid="ignore"):
        terms = np.where(ap.beta[None, :] == 0.0, 0.0, G * ap.beta[None, :])
    out = terms.sum(axis=1)
    return float(out[0]) if single else out


def _relu_units(knots: np.ndarray) -> list[TropicalUnit]:
    # max{0, x - t}
    return [TropicalUnit(0.0, [-t]) for t in knots]


def _candidate_bases(lo: float, hi: float, N: int) -> list[list[TropicalUnit]]:
    affine = TropicalUnit(NEG_INF, [0.0])  # x
    bases = [[affine] + _relu_units(np.linspace(lo, hi, N + 1)[1:-1])]
    if N >= 3:
        const = TropicalUnit(1.0, [NEG_INF])  # 1
        bases.append([const, affine] + _relu_units(np.linspace(lo, hi, N)[1:-1]))
    return bases


def _fit_beta(units: list[TropicalUnit], X: np.ndarray, y: np.ndarray) -> tuple[Approximator, float]:
    ap = Approximator(units, np.zeros(len(units)))
    G = ap.design_matrix(X)
    beta, *_ = np.linalg.lstsq(G, y, rcond=None)  # minimum-norm on rank deficiency
    ap.beta = beta
    return ap, float(np.max(np.abs(G @ beta - y)))


def approx_fit(samples, num_units: int, seed: int = 0) -> tuple[Approximator, float]:
    """Fit a one-layer tropical approximator to ``(x, y)`` samples.

    1-D inputs use knots on a uniform grid over the sample range, with and
    without a dedicated constant unit; the basis with the lower sup residual
    is kept.  n-D inputs use ``max{0, max_d(x_d - t_d)}`` units with knots
    ``t`` drawn uniformly from the sample bounding box (seeded), plus a
    constant unit.  Returns the approximator and its max absolute residual.
    """
    if isinstance(samples, tuple) and len(samples) == 2 and not np.isscalar(samples[0]):
        X, y = samples
    else:
        X, y = zip(*samples)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    if num_units < 1:
        raise DomainError("num_units must be >= 1")
    if X.shape[0] != y.shape[0] or X.shape[0] < num_units:
        raise DimensionError("need one target per sample and at least num_units samples")
    if X.shape[1] == 1:
        lo, hi = float(X.min()), float(X.max())
        if num_units == 1:
            bases = [[TropicalUnit(NEG_INF, [0.0])]]
        else:
            bases = _candidate_bases(lo, hi, num_units)
    else:
        rng = np.random.default_rng(seed)
        knots = rng.uniform(X.min(axis=0), X.max(axis=0), size=(num_units - 1, X.shape[1]))
        bases = [[TropicalUnit(1.0, [NEG_INF] * X.shape[1])] + [TropicalUnit(0.0, -t) for t in knots]]
    fits = [_fit_beta(units, X, y) for units in bases]
    return min(fits, key=lambda f: f[1])
