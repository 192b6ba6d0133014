"""Command-line interface.

    inhomkde simulate --model uniform --n 1000 --seed 7 --out sample.txt
    inhomkde estimate --in sample.txt --out est.csv
    inhomkde oracle --spec-file spec.txt --n 10000
    inhomkde grid --n 10000
    inhomkde bench --config table1_gaussian --out-csv risks.csv

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import shlex
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, run_benchmark
from .estimator import load_sample, write_sample
from .kernel import KERNELS, get_kernel
from .kvfile import read_kv
from .lepski import PLUGIN, SelectorConfig, adaptive_estimate, build_grid
from .models import MODEL_NAMES, make_model
from .oracle import SmoothnessSpec, oracle_bandwidth


class UsageError(Exception):
    """Invalid flags or input files (exit code 2)."""


def _header(args, resolved: dict) -> list:
    argv = getattr(args, "argv", None) or []
    lines = [f"inhomkde {__version__}: {shlex.join(['inhomkde', *argv])}"]
    lines += [f"{k} = {v}" for k, v in resolved.items()]
    return lines


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _csv(header_lines, columns, rows) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _grid_points(args, default_lo, default_hi):
    lo = default_lo if args.grid_from is None else args.grid_from
    hi = default_hi if args.grid_to is None else args.grid_to
    m = args.grid_points
    if m < 1:
        raise UsageError("--grid-points must be >= 1")
    if m == 1:
        return np.array([float(lo)])
    if not lo < hi:
        raise UsageError("--grid-from must be smaller than --grid-to")
    return np.linspace(lo, hi, m)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    model = make_model(args.model)
    values = model.draw(np.random.default_rng(args.seed), args.n)
    meta = (f"model = {model.name} ({model.description})\n"
            f"irregularities = {', '.join(repr(p) for p in model.irregularities) or 'none'}\n"
            f"I0 = [{model.I0[0]!r}, {model.I0[1]!r}]\n"
            f"n = {args.n}\nseed = {args.seed}\n")
    if args.out is None or args.out == "-":
        sys.stdout.write("".join(f"{float(v)!r}\n" for v in values))
        sys.stderr.write(meta)
    else:
        write_sample(values, args.out)
        sys.stdout.write(meta)
    return 0


def cmd_estimate(args) -> int:
    try:
        sample = load_sample(args.input)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kernel = get_kernel(args.kernel)
    sup = PLUGIN if args.sup_norm == PLUGIN else float(args.sup_norm)
    config = SelectorConfig(D1=args.D1, D2=args.D2, sup_norm=sup, kernel=kernel)
    grid = build_grid(sample.n, args.a)
    xs = _grid_points(args, sample.values[0], sample.values[-1])
    res = adaptive_estimate(sample, config, grid, xs)
    resolved = {"n": sample.n, "kernel": kernel.name, "a": args.a, "D1": args.D1, "D2": args.D2,
                "sup_norm": args.sup_norm, "M_used": repr(res.M), "J": grid.J,
                "grid_from": repr(float(xs[0])), "grid_to": repr(float(xs[-1])), "grid_points": xs.size}
    rows = [(repr(float(x)), repr(float(f)), repr(float(h)), int(fb))
            for x, f, h, fb in zip(res.x, res.fhat, res.h, res.fallback)]
    _emit(_csv(_header(args, resolved), ["x", "fhat", "h_selected", "fallback"], rows), args.out)
    return 0


def cmd_oracle(args) -> int:
    try:
        spec = SmoothnessSpec.from_kv(read_kv(args.spec_file))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid spec file: {exc}") from None
    kernel = get_kernel(args.kernel)
    hfun = oracle_bandwidth(spec, args.n, kernel)
    irr = spec.irregularities
    lo = (irr[0] - 1.0) if irr else -1.0
    hi = (irr[-1] + 1.0) if irr else 1.0
    xs = _grid_points(args, lo, hi)
    hs = np.atleast_1d(hfun(xs))
    resolved = {"n": args.n, "kernel": kernel.name, **spec.to_kv()}
    rows = [(repr(float(x)), repr(float(h))) for x, h in zip(xs, hs)]
    _emit(_csv(_header(args, resolved), ["x", "h0"], rows), args.out)
    return 0


def cmd_grid(args) -> int:
    grid = build_grid(args.n, args.a)
    sys.stdout.write(f"# n = {grid.n}, a = {grid.a!r}, J = {grid.J}\n")
    for j, h in enumerate(grid.values):
        sys.stdout.write(f"{j}\t{float(h)!r}\n")
    return 0


def _resolve_config(name: str) -> Path:
    p = Path(name)
    if p.is_file():
        return p
    shipped = resources.files("inhomkde") / "configs" / f"{name}.cfg"
    if shipped.is_file():
        return Path(str(shipped))
    raise UsageError(f"config {name!r} not found (neither a file nor a shipped config)")


def cmd_bench(args) -> int:
    path = _resolve_config(args.config)
    try:
        cfg = BenchConfig.from_kv(read_kv(path))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    report = run_benchmark(cfg, workers=args.threads)
    header = [f"inhomkde {__version__} bench --config {args.config}"]
    header += [f"{k} = {v}" for k, v in cfg.to_kv().items()]
    if args.out_csv:
        Path(args.out_csv).write_text(report.to_csv(timing=args.timing, header=header), encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(report.to_json(), encoding="utf-8")
    print(report.table())
    for f in report.failures:
        print(f"warning: n={f['n']} replication {f['replication']} failed: {f['error']}", file=sys.stderr)
    done = {e.n for e in report.entries}
    if any(n not in done for n in cfg.n_list):
        print("error: every replication failed for at least one sample size", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="inhomkde", description="Variable-bandwidth kernel density estimation.",
                                formatter_class=fmt)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="draw a sample from a named model", formatter_class=fmt)
    s.add_argument("--model", required=True, choices=MODEL_NAMES, metavar="NAME",
                   help=f"one of: {', '.join(MODEL_NAMES)}")
    s.add_argument("--n", type=_positive_int, required=True, help="sample size")
    s.add_argument("--seed", type=int, default=0, help="random seed")
    s.add_argument("--out", default=None, help="output file (default: standard output)")
    s.set_defaults(func=cmd_simulate)

    def add_grid_flags(q, lo_help, hi_help, points):
        q.add_argument("--grid-from", type=float, default=None, help=lo_help)
        q.add_argument("--grid-to", type=float, default=None, help=hi_help)
        q.add_argument("--grid-points", type=int, default=points, help="number of evaluation points")

    e = sub.add_parser("estimate", help="adaptive estimate of a sample file", formatter_class=fmt)
    e.add_argument("--in", dest="input", required=True, help="sample file, one float per line")
    e.add_argument("--kernel", default="order4", choices=sorted(KERNELS), help="kernel")
    e.add_argument("--a", type=float, default=2.0, help="bandwidth grid base, in (1, 2]")
    e.add_argument("--D1", type=float, default=1.0, help="threshold constant D1 (>= 1)")
    e.add_argument("--D2", type=float, default=0.4, help="log-factor constant D2 (> 0)")
    e.add_argument("--sup-norm", default=PLUGIN, help="'plugin' or a known bound on the density")
    add_grid_flags(e, "first evaluation point (default: sample minimum)",
                   "last evaluation point (default: sample maximum)", 512)
    e.add_argument("--out", default=None, help="output CSV (default: standard output)")
    e.set_defaults(func=cmd_estimate)

    o = sub.add_parser("oracle", help="oracle bandwidth profile from a smoothness spec", formatter_class=fmt)
    o.add_argument("--spec-file", required=True, help="flat key = value smoothness spec")
    o.add_argument("--n", type=_positive_int, required=True, help="sample size")
    o.add_argument("--kernel", default="order4", choices=sorted(KERNELS), help="kernel")
    add_grid_flags(o, "first point (default: first irregularity - 1)",
                   "last point (default: last irregularity + 1)", 401)
    o.add_argument("--out", default=None, help="output CSV (default: standard output)")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("grid", help="show the bandwidth grid for a sample size", formatter_class=fmt)
    g.add_argument("--n", type=_positive_int, required=True, help="sample size")
    g.add_argument("--a", type=float, default=2.0, help="grid base, in (1, 2]")
    g.set_defaults(func=cmd_grid)

    b = sub.add_parser("bench", help="Monte Carlo risk benchmark", formatter_class=fmt)
    b.add_argument("--config", required=True,
                   help="config file or shipped config name (table1_gaussian, table1_laplace, "
                        "table1_exponential, table1_beta, table1_gaussian_mixture, rate_uniform); "
                        "replications default to 200")
    b.add_argument("--out-csv", default=None, help="CSV report path")
    b.add_argument("--out-json", default=None, help="JSON report path")
    b.add_argument("--threads", type=int, default=1, help="worker processes")
    b.add_argument("--timing", action="store_true",
                   help="fill the runtime_ms CSV column (makes the CSV run-dependent)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
