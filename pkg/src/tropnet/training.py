"""Classical backpropagation, its tropicalisation and the dequantized bridge.

Layer ``j`` has weights ``W^(j)`` of shape ``(n_{j-1}, n_j)`` and derivative
diagonal ``D^(j)`` (stored as its diagonal vector).  The backpropagated error
of layer ``k`` is the right-to-left chain

    delta^(k) = D^(k) W^(k+1) D^(k+1) ... D^(l) W^(l+1) e

where ``l + 1`` is the output layer and ``e`` already contains the output
derivative.  Batches are handled as rows: for a batch ``V`` of row vectors the
step ``W v`` becomes ``V W^T``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import counters as ops
from .errors import DimensionError, DomainError
from .linalg import TropicalMatrix, product_array, real_matmul
from .network import Layer, LayeredNetwork, forward_trace
from .semiring import NEG_INF, HbarLike, as_hbar, dequantize, quantize, t_add, t_sum

log = logging.getLogger(__name__)

__all__ = [
    "ERROR_FLOOR",
    "TrainConfig",
    "TrainResult",
    "ChainReport",
    "backprop_deltas",
    "classical_delta",
    "tropical_delta",
    "tropical_update",
    "derivative_diagonal",
    "tropical_error",
    "hbar_real_matmul",
    "dequantized_chain_check",
    "positive_subchain",
    "init_network",
    "train_loop",
]

ERROR_FLOOR = -1e9
MODES = ("classical", "tropical", "dequantized")


def _rows(v) -> tuple[np.ndarray, bool]:
    a = np.asarray(v, dtype=float)
    return np.atleast_2d(a), a.ndim <= 1


def _diag(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        if d.shape[0] != d.shape[1]:
            raise DimensionError("derivative diagonal must be square")
        return np.diagonal(d).copy()
    return np.atleast_1d(d)


def _check_chain(weights, diags, n_out: int, batched: bool = False):
    l = len(diags) - 1
    if len(weights) != l + 2:
        raise DimensionError(f"{len(diags)} diagonals need {len(diags) + 1} weight matrices, got {len(weights)}")
    if np.shape(weights[-1])[1] != n_out:
        raise DimensionError(f"error vector has length {n_out}, output layer has {np.shape(weights[-1])[1]}")
    for j in range(l + 1):
        width = np.shape(diags[j])[-1] if batched else _diag(diags[j]).shape[0]
        if width != np.shape(weights[j + 1])[0]:
            raise DimensionError(f"D^({j}) does not match the inputs of W^({j + 1})")
    return l


def backprop_deltas(
    weights: Sequence, diags: Sequence, e, *, tropical: bool = False, hbar: HbarLike = None, batched: bool = False
):
    """All backpropagated errors ``delta^(0..l+1)`` (``delta^(l+1) = e``).

    ``weights[0]`` only feeds layer 0 and is not used.  ``e`` may be a vector
    or a batch of row vectors; with ``batched=True`` each diagonal is a
    ``(batch, n_j)`` array holding one diagonal per sample.
    """
    V, _ = _rows(e)
    l = _check_chain(weights, diags, V.shape[1], batched)
    h = as_hbar(hbar)
    deltas: list[np.ndarray | None] = [None] * (l + 2)
    deltas[l + 1] = V
    for j in range(l, -1, -1):
        Wt = np.asarray(weights[j + 1], dtype=float).T
        d = np.asarray(diags[j], dtype=float) if batched else _diag(diags[j])
        if tropical:
            V = ops.add(product_array(V, Wt, h), d)
        else:
            V = ops.mul(real_matmul(V, Wt), d)
        deltas[j] = np.asarray(V)
    return deltas


def classical_delta(weights: Sequence, diags: Sequence, e, k: int) -> np.ndarray:
    """``D^(k) W^(k+1) ... D^(l) W^(l+1) e`` over the reals."""
    _, single = _rows(e)
    if not 0 <= k < len(diags):
        raise DimensionError(f"layer index {k} outside 0..{len(diags) - 1}")
    out = backprop_deltas(weights, diags, e)[k]
    return out[0] if single else out


def tropical_delta(weights: Sequence, diags: Sequence, e, k: int, hbar: HbarLike = None) -> TropicalMatrix:
    """The same chain over the h-semiring, returned as a column matrix."""
    e = np.asarray(e, dtype=float)
    if e.ndim != 1:
        raise DimensionError("tropical_delta takes a single error vector")
    if not 0 <= k < len(diags):
        raise DimensionError(f"layer index {k} outside 0..{len(diags) - 1}")
    out = backprop_deltas(weights, diags, e, tropical=True, hbar=hbar)[k]
    return TropicalMatrix.column(out[0])


def tropical_update(W, delta, epsilon: float, hbar: HbarLike = None) -> TropicalMatrix:
    """``W (+) ((-eps) (x) delta)``, i.e. ``max(W, delta - eps)`` in the limit."""
    w, dlt = np.asarray(W, dtype=float), np.asarray(delta, dtype=float)
    if w.shape != dlt.shape:
        raise DimensionError(f"update shape mismatch: {w.shape} vs {dlt.shape}")
    return TropicalMatrix(np.atleast_2d(t_add(w, ops.add(dlt, -float(epsilon)), hbar)))


def derivative_diagonal(pre, mode: str = "classical", bias=None) -> np.ndarray:
    """Activation derivatives as diagonal entries.

    classical: ``1`` where the ReLU pre-activation is > 0, else ``0``.
    tropical: ``0`` where the affine part ``pre`` attains the unit's max
    against ``bias``, else ``-inf`` (the images of 1 and 0 under log_h).
    """
    pre = np.asarray(pre, dtype=float)
    ops.record("comparisons", pre.size)
    if mode == "classical":
        return np.where(pre > 0, 1.0, 0.0)
    if mode == "tropical":
        if bias is None:
            raise DomainError("tropical derivatives need the unit biases")
        return np.where(pre >= np.asarray(bias, dtype=float), 0.0, NEG_INF)
    raise DomainError(f"unknown mode {mode!r}")


def tropical_error(pred, target, hbar: HbarLike = None) -> np.ndarray:
    """Log image of ``|quantize(pred) - quantize(target)|`` (signs are dropped).

    In the limit ``log_h|h**a - h**b| -> max(a, b)`` for ``a != b``; equal
    values give the tropical zero.  For finite h logs below ``ERROR_FLOOR`` are
    clamped to it, exact zeros become ``-inf``.
    """
    p, t = np.asarray(pred, dtype=float), np.asarray(target, dtype=float)
    h = as_hbar(hbar)
    if h.is_infinite:
        ops.record("comparisons", np.broadcast(p, t).size)
        return np.where(p == t, NEG_INF, ops.maximum(p, t))
    diff = np.abs(np.asarray(quantize(p, h)) - np.asarray(quantize(t, h)))
    with np.errstate(divide="ignore"):
        lg = np.asarray(dequantize(diff, h), dtype=float)
    return np.where(diff == 0, NEG_INF, np.maximum(lg, ERROR_FLOOR))


def hbar_real_matmul(A, B, hbar: HbarLike) -> np.ndarray:
    """Real product ``A B`` evaluated in the dequantized domain.

    Each operand is split into nonnegative parts, ``A = A+ - A-``; the four
    nonnegative products are computed as h-tropical products of log images
    and quantized back.  Exact in real arithmetic for every finite h.
    """
    h = as_hbar(hbar)
    a = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_2d(np.asarray(B, dtype=float))
    la = [dequantize(np.maximum(s * a, 0.0), h) for s in (1.0, -1.0)]
    lb = [dequantize(np.maximum(s * b, 0.0), h) for s in (1.0, -1.0)]
    pos = t_add(product_array(la[0], lb[0], h), product_array(la[1], lb[1], h), h)
    neg = t_add(product_array(la[0], lb[1], h), product_array(la[1], lb[0], h), h)
    return np.asarray(quantize(pos, h)) - np.asarray(quantize(neg, h))


@dataclass
class ChainReport:
    classical_log: np.ndarray
    tropical: np.ndarray
    discrepancy: float

    def ok(self, tol: float = 1e-9) -> bool:
        return self.discrepancy <= tol


def _gap(a: np.ndarray, b: np.ndarray) -> float:
    both = (a == NEG_INF) & (b == NEG_INF)
    with np.errstate(invalid="ignore"):
        d = np.where(both, 0.0, np.abs(a - b))
    return float(np.max(d)) if d.size else 0.0


def dequantized_chain_check(mats: Sequence, e, hbar: HbarLike) -> ChainReport:
    """Compare ``log_h(M_1 ... M_r e)`` with the h-tropical chain of log images.

    Entries must be nonnegative; zeros (e.g. off-diagonal entries of a
    diagonal factor) map to ``-inf``.
    """
    h = as_hbar(hbar)
    if h.is_infinite:
        raise DomainError("dequantized_chain_check needs a finite hbar")
    ms = [np.atleast_2d(np.asarray(m, dtype=float)) for m in mats]
    v = np.asarray(e, dtype=float).reshape(-1, 1)
    for m in ms + [v]:
        if np.any(m < 0) or np.any(~np.isfinite(m)):
            raise DomainError("chain entries must be finite and nonnegative")
    classical = v
    tropical = np.asarray(dequantize(v, h))
    for m in reversed(ms):
        classical = real_matmul(m, classical)
        tropical = product_array(np.asarray(dequantize(m, h)), tropical, h)
    lhs = np.asarray(dequantize(classical, h)).ravel()
    rhs = tropical.ravel()
    return ChainReport(lhs, rhs, _gap(lhs, rhs))


def positive_subchain(weights: Sequence, diags: Sequence, e, k: int = 0) -> tuple[list[np.ndarray], np.ndarray]:
    """Magnitude chain ``[D^(k), |W^(k+1)|, ..., D^(l), |W^(l+1)|]`` and ``|e|``.

    Classical diagonals are 0/1, so this is the chain of active units with the
    absolute values of their weights; every factor is nonnegative.
    """
    e = np.abs(np.asarray(e, dtype=float).ravel())
    l = _check_chain(weights, diags, e.shape[0])
    mats = []
    for j in range(k, l + 1):
        mats.append(np.diag(np.abs(_diag(diags[j]))))
        mats.append(np.abs(np.asarray(weights[j + 1], dtype=float)))
    return mats, e


@dataclass
class TrainConfig:
    epsilon: float = 0.05
    epochs: int = 100
    mode: str = "classical"  # classical | tropical | dequantized
    hbar: float | None = None
    seed: int = 0
    hidden: tuple[int, ...] = (8,)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown training mode {self.mode!r}; expected one of {MODES}")
        if not (self.epsilon >= 0) or math.isinf(self.epsilon):
            raise DomainError("epsilon must be a finite value >= 0")
        if int(self.epochs) < 1:
            raise DomainError("epochs must be >= 1")
        if isinstance(self.hidden, int):
            self.hidden = (self.hidden,)
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.mode == "dequantized" and self.hbar is None:
            self.hbar = 1000.0
        if self.hbar is not None:
            as_hbar(self.hbar)

    @property
    def image_hbar(self) -> float:
        """h used for log images (tropical initialisation); 10 unless set."""
        return 10.0 if self.hbar is None else float(self.hbar)

    @classmethod
    def fields(cls) -> tuple[str, ...]:
        return ("epsilon", "epochs", "mode", "hbar", "seed", "hidden")


@dataclass
class TrainResult:
    net: LayeredNetwork
    losses: list[float]
    checks: list[dict] = field(default_factory=list)

    def __iter__(self):
        yield self.net
        yield self.losses


def init_network(sizes: Sequence[int], mode: str = "classical", seed: int = 0, hbar: HbarLike = 10.0) -> LayeredNetwork:
    """Seeded network with layer widths ``sizes`` (inputs first).

    classical: weights and biases uniform in [-1, 1], ReLU hidden layers and
    an identity output layer.  tropical: log_h images of uniform (0, 1].
    """
    rng = np.random.default_rng(seed)
    layers = []
    for j, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        if mode == "tropical":
            W = dequantize(1.0 - rng.uniform(0.0, 1.0, (a, b)), hbar)
            bias = dequantize(1.0 - rng.uniform(0.0, 1.0, b), hbar)
            layers.append(Layer(W, bias, "tropical"))
        else:
            W = rng.uniform(-1.0, 1.0, (a, b))
            bias = rng.uniform(-1.0, 1.0, b)
            act = "identity" if j == len(sizes) - 2 else "relu"
            layers.append(Layer(W, bias, act))
    net_mode = "tropical" if mode == "tropical" else "classical"
    return LayeredNetwork(layers, net_mode, None)


def _targets(labels, n_out: int) -> np.ndarray:
    y = np.asarray(labels)
    if y.ndim == 2:
        return y.astype(float)
    if n_out == 1:
        return y.astype(float).reshape(-1, 1)
    out = np.zeros((y.shape[0], n_out))
    out[np.arange(y.shape[0]), y.astype(int)] = 1.0
    return out


def _mse(out: np.ndarray, Y: np.ndarray) -> float:
    return float(np.mean((out - Y) ** 2))


def _classical_epoch(net: LayeredNetwork, X, Y, eps: float, matmul: Callable) -> float:
    # forward
    inputs, pre, outs = [], [], []
    O = X
    for layer in net.layers:
        inputs.append(O)
        Z = ops.add(matmul(O, layer.weights), layer.bias)
        O = ops.maximum(Z, 0.0) if layer.activation == "relu" else Z
        pre.append(Z)
        outs.append(O)
    out = outs[-1]
    with ops.paused():
        loss = _mse(out, Y)
    m = X.shape[0]
    e = ops.mul(ops.sub(out, Y), 2.0 / (m * Y.shape[1]))
    if net.layers[-1].activation == "relu":
        e = ops.mul(e, derivative_diagonal(pre[-1]))
    # backward: delta^(j-1) = (delta^(j) W^(j)^T) * D^(j-1)
    V = e
    grads = [None] * len(net.layers)
    for j in range(len(net.layers) - 1, -1, -1):
        grads[j] = (matmul(inputs[j].T, V), V.sum(axis=0))
        if j:
            D = derivative_diagonal(pre[j - 1]) if net.layers[j - 1].activation == "relu" else 1.0
            V = ops.mul(matmul(V, net.layers[j].weights.T), D)
    for layer, (gW, gb) in zip(net.layers, grads):
        layer.weights = ops.sub(layer.weights, ops.mul(eps, gW))
        layer.bias = ops.sub(layer.bias, ops.mul(eps, gb))
    return loss


def _tropical_epoch(net: LayeredNetwork, X, Y, eps: float) -> tuple[float, dict]:
    h = net.hbar
    tr = forward_trace(net, X)
    with ops.paused():
        loss = _mse(tr.output, Y)
    diags = [derivative_diagonal(tr.pre[j], "tropical", net.layers[j].bias) for j in range(len(net.layers))]
    e = ops.add(tropical_error(tr.output, Y, h), diags[-1])
    deltas = backprop_deltas(net.weights, diags[:-1], e, tropical=True, hbar=h, batched=True)
    old = [(layer.weights, layer.bias) for layer in net.layers]
    for j, layer in enumerate(net.layers):
        dW = product_array(tr.inputs[j].T, deltas[j], h)
        db = np.asarray(t_sum(deltas[j], h, axis=0))
        layer.weights = tropical_update(layer.weights, dW, eps, h).array.copy()
        layer.bias = tropical_update(layer.bias[None, :], db[None, :], eps, h).array[0].copy()
    with ops.paused():
        monotone = all(
            np.all(layer.weights >= W0) and np.all(layer.bias >= b0) for layer, (W0, b0) in zip(net.layers, old)
        )
        idempotent = True
        for j, layer in enumerate(net.layers):
            dW = product_array(tr.inputs[j].T, deltas[j], h)
            again = tropical_update(layer.weights, dW, eps, h).array
            idempotent &= bool(np.array_equal(again, layer.weights))
    return loss, {"monotone": bool(monotone), "idempotent": bool(idempotent)}


def train_loop(net: LayeredNetwork, X, labels, cfg: TrainConfig) -> TrainResult:
    """Full-batch training; returns the trained copy of ``net`` and per-epoch MSE.

    ``cfg.mode``: ``classical`` gradient descent with step ``-eps``;
    ``tropical`` applies ``W <- W (+) (delta - eps)`` per layer per epoch
    (needs a tropical network, evaluated at its own h); ``dequantized`` runs the
    classical algorithm with every matrix product evaluated through
    :func:`hbar_real_matmul` at ``cfg.hbar``.  The loss recorded for an epoch
    is the one before its update.  Per-epoch invariant checks of tropical
    runs are returned in ``checks``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise DomainError("training data is empty")
    if X.shape[1] != net.n_in:
        raise DimensionError(f"data has {X.shape[1]} features, network expects {net.n_in}")
    Y = _targets(labels, net.n_out)
    if Y.shape[0] != X.shape[0]:
        raise DimensionError("one label per sample required")
    if (cfg.mode == "tropical") != (net.mode == "tropical"):
        raise DomainError(f"{cfg.mode} training needs a {'tropical' if cfg.mode == 'tropical' else 'classical'} network")
    net = net.copy()
    losses: list[float] = []
    checks: list[dict] = []
    if cfg.mode == "dequantized":
        h = as_hbar(cfg.hbar)
        matmul = lambda A, B: hbar_real_matmul(A, B, h)
    else:
        matmul = real_matmul
    for epoch in range(int(cfg.epochs)):
        if cfg.mode == "tropical":
            try:
                loss, chk = _tropical_epoch(net, X, Y, cfg.epsilon)
            except DomainError as exc:
                # max-updates grow the weights geometrically; long runs leave float range
                raise DomainError(f"tropical iteration left the float range at epoch {epoch}: {exc}") from None
            chk["epoch"] = epoch
            checks.append(chk)
            if not (chk["monotone"] and chk["idempotent"]):
                log.error("tropical update invariant violated at epoch %d: %s", epoch, chk)
        else:
            loss = _classical_epoch(net, X, Y, cfg.epsilon, matmul)
        losses.append(loss)
    if cfg.mode == "tropical":
        ok = all(c["monotone"] and c["idempotent"] for c in checks)
        log.info("tropical run: monotone and idempotent updates on all %d epochs: %s", len(checks), ok)
    return TrainResult(net, losses, checks)
