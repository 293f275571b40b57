"""Command-line front end.

Subcommands: ``train``, ``eval``, ``stats``, ``indicator``, ``synth``.
Exit codes: 0 success, 1 runtime/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .configurator import DEFAULT_LAMBDAS, DEFAULT_RS, ONED, TWOD, TrainConfig, train_scn
from .data import Dataset, load_csv, load_idx, save_csv, synth_matrix_regression
from .errors import ConsistencyError, FormatError, NumericError, ShapeError
from .generalization import indicator_theta_raw, normalize_indicators
from .metrics import accuracy, ppa, rmse
from .model import load_network, predict, prepare_inputs, save_network
from .rvfl import train_rvfl
from .weight_stats import DISTRIBUTIONS, METHODS, TABLE_PS, TABLE_TAUS, estimate_grid

log = logging.getLogger("scn2d")

ALGOS = {"scn": ONED, "2dscn": TWOD, "rvfl": ONED, "2drvfl": TWOD}
DIST_ALIASES = {"uniform": ("uniform_pm1",), "gaussian": ("standard_normal",),
                "both": DISTRIBUTIONS}


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


def _stamp(seed) -> str:
    return f"scn2d {__version__} seed={seed}"


def _shape(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}; use e.g. 28x28 or 784") from None


def _executor(threads: int):
    if threads and threads > 1:
        return ThreadPoolExecutor(max_workers=threads)
    return contextlib.nullcontext()


# --- data arguments ------------------------------------------------------------

def _add_data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", required=True,
                   help="'synth', a CSV path, or 'idx:IMAGES,LABELS'")
    g.add_argument("--test-data", help="held-out data, same forms as --data")
    g.add_argument("--shape", type=_shape, help="input shape for CSV data, e.g. 16x16")
    g.add_argument("--targets", type=int, default=1, help="number of target columns in CSV data")
    g.add_argument("--skip-header", action="store_true", help="skip one header line in CSV data")
    g.add_argument("--task", choices=["auto", "regress", "classify"], default="auto")
    g.add_argument("--n", type=int, default=500, help="synth: samples per split")
    g.add_argument("--d1", type=int, default=16)
    g.add_argument("--d2", type=int, default=16)
    g.add_argument("--k", type=int, default=5, help="synth: planted hidden units")
    g.add_argument("--noise", type=float, default=0.05, help="synth: training-target noise sd")
    g.add_argument("--data-seed", type=int, help="synth seed (defaults to --seed)")


def _load_one(spec: str, args) -> Dataset:
    if spec.startswith("idx:"):
        try:
            images, labels = spec[4:].split(",")
        except ValueError:
            raise CliError("idx data must be given as idx:IMAGES,LABELS") from None
        return load_idx(images, labels)
    if args.shape is None:
        raise CliError("--shape is required for CSV data")
    ds = load_csv(spec, args.shape, args.targets, skip_header=args.skip_header)
    if args.task == "classify":
        ds.labels = np.argmax(ds.targets, axis=1)
    return ds


def load_split(args, split: str) -> Dataset:
    """Resolve ``--data`` / ``--test-data`` into a dataset for ``split``."""
    if args.data == "synth":
        seed = args.seed if args.data_seed is None else args.data_seed
        train, test = synth_matrix_regression(args.n, args.d1, args.d2, args.k, args.noise, seed)
        return train if split == "train" else test
    if split == "train":
        return _load_one(args.data, args)
    if args.test_data is None:
        return None
    return _load_one(args.test_data, args)


def _summary(net, ds: Dataset, prefix: str, out) -> dict:
    X = prepare_inputs(ds.inputs, net.input_shape)
    if ds.targets.shape[1] != net.n_outputs:
        raise ShapeError(f"model has {net.n_outputs} outputs, data has {ds.targets.shape[1]} targets")
    pred = predict(net, X)
    stats = {
        f"{prefix}_residual_fro": float(np.linalg.norm(pred - ds.targets)),
        f"{prefix}_rmse": rmse(pred, ds.targets),
    }
    if ds.labels is not None:
        stats[f"{prefix}_accuracy"] = accuracy(pred, ds.labels)
    for key, val in stats.items():
        print(f"{key}: {val!r}", file=out)
    return stats


# --- commands ------------------------------------------------------------------

def cmd_train(args, out=sys.stdout) -> int:
    kind = ALGOS[args.algo]
    train = load_split(args, "train")
    test = load_split(args, "test")
    os.makedirs(args.out_dir, exist_ok=True)
    stem = f"{args.algo}-seed{args.seed}"
    model_path = args.model or os.path.join(args.out_dir, f"model-{stem}.json")

    log.info("training %s on %s (%d samples, input %s)", args.algo, train.name,
             train.n_samples, train.input_shape)
    if args.algo in ("scn", "2dscn"):
        config = TrainConfig(L_max=args.L, tol_eps=args.tol, T_max=args.tmax,
                             lambda_set=tuple(args.lambdas), r_set=tuple(args.rs), seed=args.seed)
        with _executor(args.threads) as ex:
            net, report = train_scn(train.inputs, train.targets, config, kind,
                                    executor=ex if args.threads > 1 else None)
        report_path = args.report or os.path.join(args.out_dir, f"report-{stem}.csv")
        with open(report_path, "w", newline="") as fh:
            report.write_csv(fh, comment=_stamp(args.seed))
        print(f"report: {report_path}", file=out)
        print(f"terminated_by: {report.terminated_by}", file=out)
    else:
        net = train_rvfl(train.inputs, train.targets, args.L, args.lam, kind, args.seed)

    save_network(net, model_path)
    print(f"model: {model_path}", file=out)
    print(f"seed: {args.seed}", file=out)
    print(f"nodes: {net.n_nodes}", file=out)
    _summary(net, train, "train", out)
    if test is not None:
        _summary(net, test, "test", out)
    return 0


def cmd_eval(args, out=sys.stdout) -> int:
    try:
        net = load_network(args.model)
    except FileNotFoundError:
        raise CliError(f"model file not found: {args.model}") from None
    ds = load_split(args, args.split)
    if ds is None:
        raise CliError("no data for the requested split")
    X = prepare_inputs(ds.inputs, net.input_shape)
    print(f"model: {args.model}", file=out)
    print(f"builder: {net.provenance.builder}", file=out)
    print(f"samples: {ds.n_samples}", file=out)
    _summary(net, ds, args.split, out)
    pred = predict(net, X)
    if ds.labels is None and net.n_outputs == 1:
        for theta in args.theta:
            print(f"ppa@{theta:g}: {ppa(pred, ds.targets, theta)!r}", file=out)
    if args.errors_csv:
        with open(args.errors_csv, "w", newline="") as fh:
            fh.write(f"# {_stamp(net.provenance.seed)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index"] + [f"error_{q}" for q in range(net.n_outputs)])
            for i, row in enumerate(pred - ds.targets):
                w.writerow([i] + [repr(float(v)) for v in row])
    return 0


def cmd_indicator(args, out=sys.stdout) -> int:
    ds = load_split(args, args.split)
    if ds is None:
        raise CliError("no data for the requested split")
    nets = []
    for path in args.models:
        try:
            nets.append((path, load_network(path)))
        except FileNotFoundError:
            raise CliError(f"model file not found: {path}") from None

    def raw(item):
        return indicator_theta_raw(item[1], prepare_inputs(ds.inputs, item[1].input_shape))

    with _executor(args.threads) as ex:
        raws = list(ex.map(raw, nets)) if args.threads > 1 else [raw(n) for n in nets]
    thetas = normalize_indicators(raws)
    buf = io.StringIO()
    buf.write(f"# {_stamp(args.seed)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "builder", "model_seed", "raw_indicator", "theta"])
    for (path, net), r, t in zip(nets, raws, thetas):
        w.writerow([path, net.provenance.builder, net.provenance.seed, repr(r), repr(t)])
    _emit(buf.getvalue(), args.out, out)
    return 0


def _fmt(x: float) -> str:
    return "0" if x == 0 else f"{x:.4g}"


def cmd_stats(args, out=sys.stdout) -> int:
    dists = DIST_ALIASES[args.dist]
    buf = io.StringIO()
    buf.write(f"# {_stamp(args.seed)} trials={args.trials} d1={args.d1} d2={args.d2}\n")
    log.info("sparsity study: %s, %d trials per cell", ", ".join(dists), args.trials)
    with _executor(args.threads) as ex:
        grids = {dist: estimate_grid(dist, args.taus, args.ps, args.d1, args.d2, args.trials,
                                     args.seed, executor=ex if args.threads > 1 else None)
                 for dist in dists}
    if args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dist", "tau", "p", "method", "p_hat", "stderr", "hits", "trials"])
        for dist, grid in grids.items():
            for p in args.ps:
                for tau in args.taus:
                    for m in METHODS:
                        e = grid[m, tau, p]
                        w.writerow([dist, repr(tau), repr(p), m, repr(e.p_hat), repr(e.stderr),
                                    e.hits, e.trials])
    else:
        for dist, grid in grids.items():
            buf.write(f"\n{dist}: cells are M3/M2/M1, standard errors in brackets\n")
            cells = [[f"{'/'.join(_fmt(grid[m, tau, p].p_hat) for m in METHODS)} "
                      f"[{'/'.join(_fmt(grid[m, tau, p].stderr) for m in METHODS)}]"
                      for tau in args.taus] for p in args.ps]
            head = ["p \\ tau"] + [f"{tau:g}" for tau in args.taus]
            rows = [[f"{p:.0%}"] + c for p, c in zip(args.ps, cells)]
            widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
            for r in [head] + rows:
                buf.write("  ".join(s.ljust(wd) for s, wd in zip(r, widths)).rstrip() + "\n")
    _emit(buf.getvalue(), args.out, out)
    return 0


def cmd_synth(args, out=sys.stdout) -> int:
    seed = args.seed if args.data_seed is None else args.data_seed
    train, test = synth_matrix_regression(args.n, args.d1, args.d2, args.k, args.noise, seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for ds, split in ((train, "train"), (test, "test")):
        path = os.path.join(args.out_dir, f"synth-{split}.csv")
        save_csv(ds, path, comment=f"{_stamp(seed)} {ds.name}")
        print(f"{split}: {path}", file=out)
    print(f"shape: {args.d1}x{args.d2}", file=out)
    return 0


def _emit(text: str, path, out) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


# --- parser --------------------------------------------------------------------

def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="JSON file of option defaults (flags override it)")
    common.add_argument("--out-dir", default=".")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="scn2d", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"scn2d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--algo", choices=sorted(ALGOS), required=True)
    _add_data_args(p)
    p.add_argument("--L", type=int, default=100, help="max nodes (SCN kinds) or node count (RVFL kinds)")
    p.add_argument("--tol", type=float, default=1e-6, help="training residual tolerance (Frobenius)")
    p.add_argument("--tmax", type=int, default=5, help="candidates drawn per (lambda, r) attempt")
    p.add_argument("--lambdas", type=_floats, default=list(DEFAULT_LAMBDAS))
    p.add_argument("--rs", type=_floats, default=list(DEFAULT_RS))
    p.add_argument("--lam", type=float, default=1.0, help="sampling range for RVFL kinds")
    p.add_argument("--model", help="output model path")
    p.add_argument("--report", help="output build-report CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a model")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--theta", type=float, nargs="+", default=[15.0, 25.0], help="PPA thresholds")
    p.add_argument("--errors-csv", help="write per-sample errors here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", parents=[common], help="random-weight sparsity study")
    p.add_argument("--dist", choices=sorted(DIST_ALIASES), default="both")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--taus", type=_floats, default=list(TABLE_TAUS))
    p.add_argument("--ps", type=_floats, default=list(TABLE_PS))
    p.add_argument("--d1", type=int, default=28)
    p.add_argument("--d2", type=int, default=28)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("indicator", parents=[common], help="generalization indicators")
    p.add_argument("--models", nargs="+", required=True)
    _add_data_args(p)
    p.add_argument("--split", choices=["train", "test"], default="train")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.set_defaults(func=cmd_indicator)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic task as CSV")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--d1", type=int, default=16)
    p.add_argument("--d2", type=int, default=16)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--data-seed", type=int)
    p.set_defaults(func=cmd_synth)
    return parser, sub


def _apply_config(parser, sub, argv, args):
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    values = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    values.update(cfg.get(args.command, {}))
    values = {k.replace("-", "_"): v for k, v in values.items()}
    subparser = sub.choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        subparser.error(f"unknown config keys: {', '.join(unknown)}")
    subparser.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            args = _apply_config(parser, sub, argv, args)
        if args.threads < 1:
            parser.error("--threads must be at least 1")
        return args.func(args, sys.stdout)
    except (CliError, FormatError, ShapeError, ConsistencyError, NumericError, ValueError, OSError) as exc:
        print(f"scn2d: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
