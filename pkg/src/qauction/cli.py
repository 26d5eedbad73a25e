"""Command-line front end.

Usage::

    qauction table1 --n-max 10 --sigma 1
    qauction rho-curve --n 3 --p-min -3 --p-max 3 --steps 121
    qauction asym --n-list 3,10,100,1000,10000
    qauction bidder --n-list 1,2,3 --p-prime=-inf
    qauction simulate config.json --trials 1000000 --seed 42
    qauction gumbel --n-list 100,10000 --trials 100000 --seed 7

Tables go to ``--out`` (or stdout) as CSV or JSON. A CSV file written to disk is
accompanied by ``<out>.manifest.json``; JSON output embeds the manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .asymptotics import asymptotic_max_rho, gumbel_sup_distance, log_fit
from .auction_measure import AuctionConfig
from .errors import ConfigError, NumericalFailureError
from .montecarlo import empirical_gumbel_distance, simulate_config, simulate_joint
from .profit import max_rho, rho_bidder, rho_seller
from .strategies import Gaussian, JointStrategy2D, strategy_from_dict

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_NUMERICAL = 4

# Parameters that change how work is scheduled but never what is computed.
_NOT_IN_MANIFEST = {"command", "func", "out", "threads"}


@dataclass
class RunManifest:
    command: str
    parameters: dict[str, Any]
    seed: int | None
    output_path: str
    tool_version: str = __version__


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".10g")


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _int_list(text: str) -> list[int]:
    try:
        values = [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit(columns: list[str], rows: Iterable[Sequence[Any]], args, manifest: RunManifest):
    rows = list(rows)
    if args.format == "json":
        payload = {
            "manifest": asdict(manifest),
            "columns": columns,
            "rows": [dict(zip(columns, r)) for r in rows],
        }
        _write(json.dumps(payload, indent=2) + "\n", args.out)
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v) for v in r])
    _write(buf.getvalue(), args.out)
    if args.out is not None:
        Path(args.out + ".manifest.json").write_text(json.dumps(asdict(manifest), indent=2) + "\n")


def _manifest(args) -> RunManifest:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_IN_MANIFEST}
    for k, v in params.items():
        if isinstance(v, float) and not math.isfinite(v):
            params[k] = str(v)
    return RunManifest(
        command=args.command,
        parameters=params,
        seed=getattr(args, "seed", None),
        output_path=args.out if args.out is not None else "-",
    )


def cmd_table1(args) -> int:
    eta = Gaussian(0.0, args.sigma)

    def row(n):
        best = max_rho(eta, n)
        rho_inf = rho_seller(eta, n, -math.inf).rho
        ratio = best.rho_star / rho_inf if n >= 2 else None
        p_star = math.exp(best.p_star) if args.prices else best.p_star
        return [n, best.rho_star, rho_inf, ratio, p_star]

    rows = _parallel_map(row, list(range(1, args.n_max + 1)), args.threads)
    cols = ["N", "max_rho", "rho_inf", "ratio", "seller_price_star" if args.prices else "p_star"]
    _emit(cols, rows, args, _manifest(args))
    return EXIT_OK


def cmd_rho_curve(args) -> int:
    if args.steps < 2 or not args.p_min < args.p_max:
        raise SystemExit("rho-curve needs --steps >= 2 and --p-min < --p-max")
    eta = Gaussian(0.0, args.sigma)
    grid = np.linspace(args.p_min, args.p_max, args.steps).tolist()

    def row(p):
        r = rho_seller(eta, args.n, p)
        return [math.exp(p) if args.prices else p, r.rho, r.numerator, r.denominator]

    rows = _parallel_map(row, grid, args.threads)
    _emit(["seller_price" if args.prices else "p_prime", "rho", "numerator", "denominator"], rows, args, _manifest(args))
    return EXIT_OK


def cmd_asym(args) -> int:
    if any(n < 3 for n in args.n_list):
        raise SystemExit("asym needs every N >= 3")
    eta = Gaussian()

    def row(n):
        quad = max_rho(eta, n).rho_star if n <= args.quadrature_max_n else None
        asym = asymptotic_max_rho(n)
        fit = log_fit(n)
        return [
            n,
            quad if quad is not None else "skipped",
            asym,
            fit,
            asym - fit,
            quad - fit if quad is not None else None,
            quad - asym if quad is not None else None,
        ]

    rows = _parallel_map(row, args.n_list, args.threads)
    cols = ["N", "max_rho", "asymptotic", "log_fit", "asymptotic_minus_fit", "max_rho_minus_fit", "max_rho_minus_asymptotic"]
    _emit(cols, rows, args, _manifest(args))
    return EXIT_OK


def cmd_bidder(args) -> int:
    eta = Gaussian(0.0, args.sigma)
    q = np.linspace(args.q_min, args.q_max, args.steps)
    curves = [rho_bidder(eta, n, args.p_prime, q) for n in args.n_list]
    xs = np.exp(-q) if args.prices else q
    rows = [[x, *(float(c[i]) for c in curves)] for i, x in enumerate(xs.tolist())]
    cols = ["bid_price" if args.prices else "q_prime", *(f"rho_N{n}" for n in args.n_list)]
    _emit(cols, rows, args, _manifest(args))
    return EXIT_OK


def _load_config(path: str):
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("", "expected a JSON object")
    bidders = raw.get("bidders")
    is_joint = isinstance(bidders, list) and any(isinstance(b, dict) and b.get("type") == "joint2d" for b in bidders)
    is_joint = is_joint or (isinstance(raw.get("seller"), dict) and raw["seller"].get("type") == "joint2d")
    if not is_joint:
        return AuctionConfig.from_dict(raw)
    if not isinstance(bidders, list) or not bidders:
        raise ConfigError("bidders", "expected a non-empty list")
    if "seller" not in raw:
        raise ConfigError("seller", "missing")
    joint = [JointStrategy2D.from_dict(b, f"bidders[{i}]") for i, b in enumerate(bidders)]
    s = raw["seller"]
    seller = JointStrategy2D.from_dict(s, "seller") if s.get("type") == "joint2d" else strategy_from_dict(s, "seller")
    return joint, seller


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if isinstance(cfg, AuctionConfig):
        result = simulate_config(cfg, args.trials, args.seed, args.threads).to_dict()
    else:
        bidders, seller = cfg
        result = simulate_joint(bidders, seller, args.trials, args.seed, args.threads).to_dict()
    manifest = _manifest(args)
    _write(json.dumps({"manifest": asdict(manifest), "report": result}, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_gumbel(args) -> int:
    if any(n < 2 for n in args.n_list):
        raise SystemExit("gumbel needs every N >= 2")
    rows = [
        [n, gumbel_sup_distance(n), empirical_gumbel_distance(n, args.trials, args.seed, args.threads)]
        for n in args.n_list
    ]
    _emit(["N", "exact_sup_distance", "ks_distance"], rows, args, _manifest(args))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out", default=None, help="output file (default: stdout)")
    shared.add_argument("--format", choices=("csv", "json"), default="csv")
    shared.add_argument("--threads", type=int, default=1, help="worker threads; never changes the output")
    shared.add_argument("--prices", action="store_true", help="report multiplicative prices instead of log-prices")
    sigma = argparse.ArgumentParser(add_help=False)
    sigma.add_argument("--sigma", type=float, default=1.0, help="dispersion of the Gaussian bidder strategy")

    def seeded(default_seed):
        # a fresh parent per command: parent actions are shared, so defaults must not be
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument("--seed", type=int, default=default_seed)
        parent.add_argument("--trials", type=int, default=100_000)
        return parent

    parser = argparse.ArgumentParser(prog="qauction", description="English q-auction profit intensities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[shared, sigma], help="max profit intensity, rho(-inf) and their ratio")
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("rho-curve", parents=[shared, sigma], help="seller profit intensity against p'")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--p-min", type=float, default=-3.0)
    p.add_argument("--p-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=121)
    p.set_defaults(func=cmd_rho_curve)

    p = sub.add_parser("asym", parents=[shared], help="max profit intensity against its large-N forms")
    p.add_argument("--n-list", type=_int_list, default=[3, 10, 30, 100, 300, 1000, 3000, 10000])
    p.add_argument("--quadrature-max-n", type=int, default=10**6, help="skip quadrature above this N")
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("bidder", parents=[shared, sigma], help="bidder profit intensity against q'")
    p.add_argument("--n-list", type=_int_list, default=[1, 2, 3])
    p.add_argument("--q-min", type=float, default=-3.0)
    p.add_argument("--q-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=121)
    p.add_argument("--p-prime", type=float, default=-math.inf, help="seller withdrawal log-price (use --p-prime=-inf)")
    p.set_defaults(func=cmd_bidder)

    p = sub.add_parser("simulate", parents=[shared, seeded(42)], help="simulate the auction in a JSON config")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gumbel", parents=[shared, seeded(7)], help="distance of the rescaled winner to Gumbel")
    p.add_argument("--n-list", type=_int_list, default=[100, 10000])
    p.set_defaults(func=cmd_gumbel)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qauction: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailureError as exc:
        print(f"qauction: numerical failure: {exc} (achieved {exc.achieved})", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
