"""Command-line front end: ``vgvalid {fit,simulate,graph,indicator,sweep,probe}``.

Options may also come from a ``key=value`` file passed with ``--config``;
flags given on the command line win. Every file written embeds the run
configuration (including the seed) as a leading ``#`` line or a JSON
``provenance`` block.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from . import garch
from .ensemble import (
    EnsembleConfig, distance_profile, generate_frequencies, null_degree_distribution,
    compare_with_null, stability_csv, stability_diagnostic,
)
from .garch import FitReport, GarchError, GjrGarchParams
from .stats import NoiseFamily
from .timeseries import DataError, compute_returns, historical_volatility, load_csv, prices_from_returns
from .validation import ValidationConfig, conditional_volatility_series, sliding_indicators
from .visibility import build_pair, degree_histogram, degrees, write_edge_list

EXIT_FAILURE = 1
EXIT_USAGE = 2

# options recorded in indicator outputs; sweep files for a single grid point
# therefore match the indicator output for the same settings byte for byte
_INDICATOR_KEYS = ("input", "format", "seed", "window", "shift", "rho", "ensemble_size", "noise",
                   "ivg_mode", "fit_scope", "price_column", "date_column", "params_json")


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="key=value file with option defaults")
    g.add_argument("--input", help="price CSV (header row; columns date, close)")
    g.add_argument("--output", help="output file or directory (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--window", type=int, default=500, help="window length W")
    g.add_argument("--shift", type=int, default=60, help="window shift L")
    g.add_argument("--rho", type=float, default=0.1, help="validation threshold")
    g.add_argument("--ensemble-size", type=int, default=3000, help="null ensemble size Z")
    g.add_argument("--noise", choices=("normal", "t"), default="t")
    g.add_argument("--ivg-mode", choices=("literal", "complement"), default="literal")
    g.add_argument("--fit-scope", choices=("global", "per-window"), default="global")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--quiet", action="store_true", help="no progress on stderr")
    g.add_argument("--price-column", default="close")
    g.add_argument("--date-column", default="date")
    g.add_argument("--params-json", help="use these model parameters (fit report or params JSON) instead of fitting")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="vgvalid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="maximum-likelihood GJR-GARCH fit")
    p.add_argument("--json", help="also write the fit report as JSON here")

    p = sub.add_parser("simulate", parents=[common], help="simulate a price series from the model")
    p.add_argument("--length", type=int, default=3000, help="number of returns")
    p.add_argument("--alpha0", type=float, default=0.002)
    p.add_argument("--alpha1", type=float, default=0.0)
    p.add_argument("--beta1", type=float, default=0.926)
    p.add_argument("--gamma1", type=float, default=0.14)
    p.add_argument("--dof", type=float, default=8.9)
    p.add_argument("--sigma0", type=float, help="initial volatility (default: unconditional)")
    p.add_argument("--first-price", type=float, default=100.0)

    p = sub.add_parser("graph", parents=[common], help="edge list of the VG / IVG of a series")
    p.add_argument("--kind", choices=("vg", "ivg"), default="vg")
    p.add_argument("--series", choices=("volatility", "close"), default="volatility")

    p = sub.add_parser("indicator", parents=[common], help="sliding-window n_t and V_t")
    p.add_argument("--labels", help="file of event dates (one per line) echoed into the output")

    p = sub.add_parser("sweep", parents=[common], help="indicator over a grid of rho, W, L")
    p.add_argument("--rho-grid", type=_floats, default=[0.05, 0.1, 0.2])
    p.add_argument("--window-grid", type=_ints, default=[250, 500])
    p.add_argument("--shift-grid", type=_ints, default=[60])

    p = sub.add_parser("probe", parents=[common], help="null-model diagnostics")
    p.add_argument("--probe-samples", type=int, default=100,
                   help="null replicates pooled for the degree distribution")
    p.add_argument("--stability-z", type=_ints, default=[10, 100, 1000])
    p.add_argument("--repeats", type=int, default=20)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and not argv[0].startswith("-"):
        values = read_config(known.config)
        subparser = parser._subparsers._group_actions[0].choices.get(argv[0])
        if subparser is not None:
            by_dest = {a.dest: a for a in subparser._actions}
            defaults = {}
            for key, raw in values.items():
                action = by_dest.get(key)
                if action is None:
                    raise UsageError(f"unknown config key {key!r}")
                if action.const is True and action.nargs == 0:  # store_true flags
                    defaults[key] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    defaults[key] = action.type(raw) if action.type else raw
            subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


# --------------------------------------------------------------------------
# helpers


def _progress(args, what: str):
    if args.quiet:
        return None

    def report(done, total):
        print(f"[{what}] {done}/{total}", file=sys.stderr, flush=True)

    return report


def _run_config(args) -> dict:
    """Options that shaped the run, for embedding in outputs."""
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key in ("config", "quiet", "workers", "output"):
            continue
        cfg[key] = value
    return cfg


def _write(args, text: str, path: Optional[str] = None) -> None:
    path = path or args.output
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_params(path: str) -> GjrGarchParams:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "params" in data and isinstance(data["params"], dict):
        data = data["params"]
    return GjrGarchParams.from_dict(data)


def _prepare(args):
    """Prices -> (volatility, returns, params, fit report or None)."""
    if not args.input:
        raise UsageError("--input is required")
    prices = load_csv(args.input, price_column=args.price_column, date_column=args.date_column)
    params = _load_params(args.params_json) if args.params_json else None
    if params is None and len(prices) - 1 < garch.MIN_FIT_LENGTH:
        raise UsageError(f"need at least {garch.MIN_FIT_LENGTH} returns to fit, got {len(prices) - 1}")
    vol, returns, report = conditional_volatility_series(prices, params, noise=args.noise)
    return vol, returns, (params or report.params), report


def _validation_config(args, **over) -> ValidationConfig:
    kw = dict(rho=args.rho, window=args.window, shift=args.shift, ensemble_size=args.ensemble_size,
              fit_scope=args.fit_scope, ivg_mode=args.ivg_mode, seed=args.seed)
    kw.update(over)
    return ValidationConfig(**kw)


def _read_labels(path: str) -> List[str]:
    with open(path, encoding="utf-8") as fh:
        rows = [line.strip().split(",")[0] for line in fh if line.strip() and not line.startswith("#")]
    return [r for r in rows if r.lower() not in ("date", "label")]


def _indicator_text(series, args, fmt: str) -> str:
    return series.to_json() + "\n" if fmt == "json" else series.to_csv()


# --------------------------------------------------------------------------
# subcommands


def cmd_fit(args) -> int:
    if not args.input:
        raise UsageError("--input is required")
    prices = load_csv(args.input, price_column=args.price_column, date_column=args.date_column)
    returns = compute_returns(prices)
    if len(returns) < garch.MIN_FIT_LENGTH:
        raise UsageError(f"need at least {garch.MIN_FIT_LENGTH} returns to fit, got {len(returns)}")
    report = garch.fit(returns, noise=args.noise)
    if args.format == "json" and not args.json:
        _write(args, report.to_json(indent=1) + "\n")
    else:
        _write(args, report.table() + "\n")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(indent=1) + "\n")
    if not report.converged:
        print("warning: optimizer did not converge; best point reported", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    if args.params_json:
        params = _load_params(args.params_json)
    else:
        noise = NoiseFamily.student_t(args.dof) if args.noise == "t" else NoiseFamily.normal()
        params = GjrGarchParams(args.alpha0, args.alpha1, args.beta1, args.gamma1, noise)
    sigma0 = args.sigma0 or math.sqrt(garch.unconditional_variance(params))
    r, s = garch.simulate(params, args.length, sigma0, args.seed)
    prices = prices_from_returns(r, args.first_price)
    buf = io.StringIO()
    buf.write("# " + json.dumps({"command": "simulate", "params": params.to_dict(), "sigma0": sigma0,
                                 "seed": args.seed, "length": args.length}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "close", "return", "volatility"])
    w.writerow([1, repr(float(prices.values[0])), "", ""])
    for t in range(len(r)):
        w.writerow([t + 2, repr(float(prices.values[t + 1])), repr(float(r.values[t])), repr(float(s.values[t]))])
    _write(args, buf.getvalue())
    return 0


def cmd_graph(args) -> int:
    if not args.input:
        raise UsageError("--input is required")
    if args.series == "close":
        y = load_csv(args.input, price_column=args.price_column, date_column=args.date_column).values
    else:
        y = _prepare(args)[0].values
    vg, ivg = build_pair(y, args.ivg_mode)
    g = vg if args.kind == "vg" else ivg
    buf = io.StringIO()
    buf.write("# " + json.dumps(_run_config(args), sort_keys=True) + "\n")
    write_edge_list(g, buf)
    _write(args, buf.getvalue())
    return 0


def cmd_indicator(args) -> int:
    vol, returns, params, _ = _prepare(args)
    cfg = _validation_config(args)
    series = sliding_indicators(vol, cfg, [cfg.rho], params, returns, args.workers,
                                _progress(args, "window"))[cfg.rho]
    series.extra["run"] = {k: getattr(args, k) for k in _INDICATOR_KEYS}
    if args.labels:
        series.extra["event_labels"] = _read_labels(args.labels)
    _write(args, _indicator_text(series, args, args.format))
    return 0


def cmd_sweep(args) -> int:
    if not args.output:
        raise UsageError("sweep writes one file per combination: --output DIR is required")
    if not (args.rho_grid and args.window_grid and args.shift_grid):
        raise UsageError("every grid needs at least one value")
    for rho in args.rho_grid:
        if not 0 < rho <= 1:
            raise UsageError(f"rho grid value {rho} outside (0, 1]")
    if min(args.window_grid) < 2 or min(args.shift_grid) < 1:
        raise UsageError("windows must be >= 2 and shifts >= 1")
    vol, returns, params, _ = _prepare(args)
    os.makedirs(args.output, exist_ok=True)
    ext = "json" if args.format == "json" else "csv"
    summary = io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    sw.writerow(["window", "shift", "rho_a", "rho_b", "spearman_n"])
    for window, shift in itertools.product(args.window_grid, args.shift_grid):
        if window > len(vol):
            raise UsageError(f"window {window} longer than the series ({len(vol)})")
        base = _validation_config(args, window=window, shift=shift, rho=args.rho_grid[0])
        by_rho = sliding_indicators(vol, base, list(args.rho_grid), params, returns, args.workers,
                                    _progress(args, f"W={window} L={shift}"))
        for rho, series in by_rho.items():
            run = {k: getattr(args, k) for k in _INDICATOR_KEYS}
            run.update(rho=rho, window=window, shift=shift)
            series.extra["run"] = run
            name = f"indicator_rho{rho:g}_W{window}_L{shift}.{ext}"
            _write(args, _indicator_text(series, args, args.format), os.path.join(args.output, name))
        for ra, rb in itertools.combinations(args.rho_grid, 2):
            na, nb = by_rho[ra].column("n"), by_rho[rb].column("n")
            rc = spearmanr(na, nb)[0] if len(na) > 1 else float("nan")
            sw.writerow([window, shift, ra, rb, repr(float(rc))])
    header = "# " + json.dumps(_run_config(args), sort_keys=True) + "\n"
    _write(args, header + summary.getvalue(), os.path.join(args.output, "summary.csv"))
    return 0


def cmd_probe(args) -> int:
    if not args.output:
        raise UsageError("probe writes several files: --output DIR is required")
    vol, returns, params, _ = _prepare(args)
    os.makedirs(args.output, exist_ok=True)
    header = "# " + json.dumps(_run_config(args), sort_keys=True) + "\n"
    sigma0 = historical_volatility(returns)

    emp = degree_histogram(degrees(build_pair(vol.values)[0])[0])
    null_cfg = EnsembleConfig(1, len(vol), sigma0, params, args.seed, args.ivg_mode, stream_key=(1,))
    null = null_degree_distribution(null_cfg, args.probe_samples, args.workers)
    test = compare_with_null(emp, null)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["degree", "empirical_count", "null_count", "empirical_fraction", "null_fraction"])
    for k in sorted(set(emp.counts) | set(null.counts)):
        e, n = emp.counts.get(k, 0), null.counts.get(k, 0)
        w.writerow([k, e, n, repr(e / emp.total), repr(n / null.total)])
    _write(args, header + buf.getvalue(), os.path.join(args.output, "degree_distribution.csv"))
    _write(args, json.dumps({"provenance": _run_config(args), "statistic": test.statistic,
                             "p_value": test.p_value, "method": test.method,
                             "n_empirical": emp.total, "n_null": null.total}, indent=1) + "\n",
           os.path.join(args.output, "rank_sum.json"))

    if args.window > len(vol):
        raise UsageError(f"window {args.window} longer than the series ({len(vol)})")
    ens = EnsembleConfig(args.ensemble_size, args.window, sigma0, params, args.seed, args.ivg_mode)
    freq = generate_frequencies(ens, args.workers, _progress(args, "ensemble"))
    _write(args, header + distance_profile(freq).to_csv(), os.path.join(args.output, "distance_profile.csv"))

    rows = stability_diagnostic(ens, args.stability_z, args.repeats, workers=args.workers)
    note = "# distance = Jensen-Shannon divergence (bits) between pooled VG degree histograms\n"
    _write(args, header + note + stability_csv(rows), os.path.join(args.output, "stability.csv"))
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "graph": cmd_graph,
    "indicator": cmd_indicator,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"vgvalid: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vgvalid {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, GarchError, ValueError, OSError) as exc:
        print(f"vgvalid {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
