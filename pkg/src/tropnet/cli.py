"""Command line entry point: ``tropnet <subcommand> ...``.

Exit status: 0 on success, 1 on usage errors, 2 on data or domain errors.
The default seed comes from ``$TROPNET_SEED`` (else 0); ``--seed`` overrides.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

import numpy as np

from . import formats
from .bench import KINDS, bench_sweep
from .errors import TropnetError
from .grid import GridSpec
from .network import LayeredNetwork, approx_fit
from .polynomial import TropicalPolynomial, corner_locus_grid
from .semiring import as_hbar
from .topology import ScalarField, check_classification_equivalence, label_components, label_mask
from .training import TrainConfig, init_network, train_loop

log = logging.getLogger("tropnet")

SEED_ENV = "TROPNET_SEED"
# options whose values may start with '-' (e.g. --bbox -2,2,-2,2)
_NEGATIVE_OK = {"--bbox", "--sizes", "--hbar", "--epsilon", "--level", "--zero-tol"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tropnet", description="Tropical arithmetic, networks and backpropagation tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="classical vs tropical matmul operation counts")
    b.add_argument("--sizes", type=_ints, default=[4, 16, 64])
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--kinds", type=lambda s: [t for t in s.split(",") if t], default=list(KINDS))
    b.add_argument("--seed", type=int)
    b.add_argument("--out", default="-")

    t = sub.add_parser("train", help="train a network classically, tropically or dequantized")
    t.add_argument("--mode", choices=["classical", "tropical", "dequantized"])
    t.add_argument("--hbar", type=float)
    t.add_argument("--epochs", type=int)
    t.add_argument("--epsilon", type=float)
    t.add_argument("--hidden", type=_ints)
    t.add_argument("--data", required=True)
    t.add_argument("--header", action="store_true", help="dataset has a header row")
    t.add_argument("--config", help="JSON file with TrainConfig fields")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", default="-", help="loss history CSV")
    t.add_argument("--save-net", help="write the trained network JSON here")

    c = sub.add_parser("cornerlocus", help="grid corner locus of a tropical polynomial")
    c.add_argument("--poly", required=True)
    c.add_argument("--bbox", type=_floats, required=True)
    c.add_argument("--res", type=int, default=101)
    c.add_argument("--out", default="-")

    m = sub.add_parser("components", help="label components of a zero-locus complement")
    m.add_argument(
        "--field",
        required=True,
        help="polynomial or network JSON file, or 'expr:<expression in x, y, z>'",
    )
    m.add_argument("--bbox", type=_floats, required=True)
    m.add_argument("--res", type=int, default=101)
    m.add_argument("--zero-tol", type=float)
    m.add_argument("--level", type=float, default=0.0, help="network fields use net(x) - level")
    m.add_argument("--log-hbar", type=float, help="label the pushforward u -> f(h**u); --bbox is then in log_h coordinates")
    m.add_argument("--data", help="labelled points to check against the labeling")
    m.add_argument("--header", action="store_true")
    m.add_argument("--out", default="-")

    a = sub.add_parser("approx", help="fit a one-layer tropical approximator")
    a.add_argument("--target-csv", required=True)
    a.add_argument("--header", action="store_true")
    a.add_argument("--units", type=int, default=8)
    a.add_argument("--seed", type=int)
    a.add_argument("--out", default="-")
    return p


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    out, it = [], iter(argv)
    for tok in it:
        if tok in _NEGATIVE_OK:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _seed(args) -> int:
    return _default_seed() if args.seed is None else args.seed


def cmd_bench(args) -> None:
    seed = _seed(args)
    log.info("bench seed=%d sizes=%s reps=%d", seed, args.sizes, args.reps)
    report = bench_sweep(args.kinds, args.sizes, args.reps, seed)
    formats.write_text(args.out, report.to_csv())


def _train_config(args) -> TrainConfig:
    values: dict = {}
    if args.config:
        try:
            raw = json.loads(formats.read_text(args.config))
        except json.JSONDecodeError as exc:
            raise TropnetError(f"config is not valid JSON: {exc}") from None
        unknown = set(raw) - set(TrainConfig.fields())
        if unknown:
            raise TropnetError(f"unknown config fields: {sorted(unknown)}")
        values.update(raw)
    for name in TrainConfig.fields():
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if "seed" not in values:
        values["seed"] = _default_seed()
    return TrainConfig(**values)


def cmd_train(args) -> None:
    cfg = _train_config(args)
    X, labels = formats.read_dataset(args.data, args.header)
    n_out = 1 if np.unique(labels).size <= 2 else int(labels.max()) + 1
    sizes = [X.shape[1], *cfg.hidden, n_out]
    log.info("train mode=%s seed=%d epochs=%d epsilon=%g sizes=%s", cfg.mode, cfg.seed, cfg.epochs, cfg.epsilon, sizes)
    net = init_network(sizes, "tropical" if cfg.mode == "tropical" else "classical", cfg.seed, cfg.image_hbar)
    result = train_loop(net, X, labels, cfg)
    if cfg.mode == "tropical":
        ok = all(c["monotone"] and c["idempotent"] for c in result.checks)
        log.info("monotone weight updates (W_new >= W_old) on every epoch: %s", ok)
        if not ok:
            raise TropnetError("tropical update invariants violated")
    formats.write_text(args.out, formats.loss_csv(result.losses))
    if args.save_net:
        formats.write_text(args.save_net, result.net.dumps() + "\n")


def cmd_cornerlocus(args) -> None:
    P = TropicalPolynomial.loads(formats.read_text(args.poly))
    grid = GridSpec.from_bbox(args.bbox, args.res)
    marked = corner_locus_grid(P, grid)
    lab = label_mask(grid, marked)
    out = {
        "grid": grid.to_dict(),
        "shape": list(marked.shape),
        "marked": [int(v) for v in marked.ravel()],
        "num_marked": int(marked.sum()),
        "num_components": lab.num_components,
    }
    formats.write_text(args.out, formats.dump_json(out))


def _expr_field(expr: str, ndim: int) -> ScalarField:
    import sympy

    names = ["x", "y", "z"][:ndim]
    syms = sympy.symbols(names)
    try:
        fn = sympy.lambdify(syms, sympy.sympify(expr, locals=dict(zip(names, syms))), "numpy")
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise TropnetError(f"cannot parse field expression {expr!r}: {exc}") from None

    def values(pts):
        out = fn(*[pts[..., i] for i in range(ndim)])
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:-1])

    return ScalarField.classical(values, ndim)


def _load_field(source: str, ndim: int, level: float) -> ScalarField:
    if source.startswith("expr:"):
        return _expr_field(source[5:], ndim)
    try:
        d = json.loads(formats.read_text(source))
    except json.JSONDecodeError as exc:
        raise TropnetError(f"field file is not valid JSON: {exc}") from None
    if "monomials" in d:
        return ScalarField.from_polynomial(TropicalPolynomial.from_dict(d))
    if "layers" in d:
        net = LayeredNetwork.from_dict(d)
        if net.mode == "tropical":
            return ScalarField.from_tropical_network(net)
        return ScalarField.from_network(net, level)
    raise TropnetError("field file is neither a polynomial nor a network")


def cmd_components(args) -> None:
    grid = GridSpec.from_bbox(args.bbox, args.res)
    field = _load_field(args.field, grid.ndim, args.level)
    if args.log_hbar is not None:
        field = field.pushforward(as_hbar(args.log_hbar))
    lab = label_components(field, grid, args.zero_tol)
    out = lab.to_dict()
    if args.data:
        X, labels = formats.read_dataset(args.data, args.header)
        out["equivalence"] = check_classification_equivalence(X, labels, lab).to_dict()
    formats.write_text(args.out, formats.dump_json(out))


def cmd_approx(args) -> None:
    seed = _seed(args)
    X, y = formats.read_samples(args.target_csv, args.header)
    ap, resid = approx_fit((X, y), args.units, seed)
    out = ap.to_dict()
    out["max_abs_residual"] = resid
    out["seed"] = seed
    formats.write_text(args.out, formats.dump_json(out))


COMMANDS = {
    "bench": cmd_bench,
    "train": cmd_train,
    "cornerlocus": cmd_cornerlocus,
    "components": cmd_components,
    "approx": cmd_approx,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (TropnetError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"tropnet: error: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
