"""Command line entry point.

Exit codes: 0 success, 2 validation error, 3 small-demand precondition
violated, 4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from sdnadmit import formats
from sdnadmit.baseline import gen_lower_bound_trace, lower_bound_curve
from sdnadmit.errors import InvariantViolation, AccountingError, NetworkError, TraceError, ValidationError
from sdnadmit.harness import RunConfig, gen_random_instance, resolve_params, run, validate_trace

EXIT_OK, EXIT_VALIDATION, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 2, 3, 4


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", type=Path, required=True)
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--k", type=int, default=None, help="longest PR-path bound (default: from trace)")
    p.add_argument("--b-max", type=int, default=None, help="benefit bound (default: from trace)")
    p.add_argument("--p-max", type=int, default=None, help="realization length bound (default: |V|*k)")
    p.add_argument("--on-precondition", choices=["reject", "warn"], default="reject")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdnadmit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a trace through the online algorithm")
    _add_param_flags(p)
    p.add_argument("--baseline", action="store_true", help="solve the per-step fractional optimum")
    p.add_argument("--integral", action="store_true", help="also brute-force the integral optimum")
    p.add_argument("--retry-order", choices=["fifo", "benefit", "density"], default="fifo")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--dump-product", action="store_true", help="write each arrival's product network under OUT/product")

    p = sub.add_parser("gen", help="generate a network and trace")
    p.add_argument("--kind", choices=["random", "lowerbound"], required=True)
    p.add_argument("--n", type=int, required=True, help="max nodes (random) or path length (lowerbound)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b-max", type=int, default=None)
    p.add_argument("--quiet", type=int, default=10, help="idle steps before the lower-bound requests leave")
    p.add_argument("--requests", type=int, default=20, help="max requests (random)")
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--plot-data", action="store_true", help="also write ratio-vs-n for n = 2, 4, ..., N")

    p = sub.add_parser("check", help="validate a network and trace without running")
    _add_param_flags(p)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        network=args.network,
        trace=args.trace,
        k=args.k,
        b_max=args.b_max,
        p_max=args.p_max,
        retry_order=args.retry_order,
        baseline=args.baseline,
        integral=args.integral,
        on_precondition=args.on_precondition,
        out=args.out,
        dump_product=args.dump_product,
    )
    result = run(cfg)
    m = result.metrics()
    ratio = "n/a" if m["ratio"] is None else f"{m['ratio']:.6f}"
    print(f"steps={m['steps']} total_benefit={m['total_benefit']} accepted={m['accepted']} ratio={ratio}")
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    if args.kind == "random":
        net, events, params = gen_random_instance(
            args.seed, max_nodes=args.n, max_requests=args.requests, max_benefit=args.b_max or 5
        )
    else:
        net, events, params = gen_lower_bound_trace(args.n, args.b_max or 1, args.quiet)
    formats.write_json(args.out / "network.json", formats.network_to_dict(net))
    formats.write_json(args.out / "trace.json", formats.trace_to_dict(events, params))
    if args.plot_data:
        if args.kind != "lowerbound":
            print("--plot-data applies to --kind lowerbound only", file=sys.stderr)
            return EXIT_VALIDATION
        sizes = [1 << i for i in range(1, args.n.bit_length()) if (1 << i) <= args.n]
        rows = lower_bound_curve(sizes, args.b_max or 1)
        with open(args.out / "plot_data.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "phi", "alg_benefit", "opt_fractional", "ratio"])
            for r in rows:
                w.writerow([r["n"], f"{r['phi']:.6f}", r["alg_benefit"], f"{r['opt_fractional']:.6f}", f"{r['ratio']:.6f}"])
    print(f"wrote {args.out / 'network.json'} and {args.out / 'trace.json'} ({len(events)} events)")
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    net = formats.load_network(args.network)
    events, trace_params = formats.load_trace(args.trace)
    params = resolve_params(net, events, args.k, args.b_max, args.p_max, trace_params)
    warnings = validate_trace(net, events, params, args.on_precondition)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"ok: {len(events)} events, k={params.k} b_max={params.b_max} p_max={params.p_max} phi={params.phi:.6f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SDNADMIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "gen": _cmd_gen, "check": _cmd_check}[args.command]
    try:
        return handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION if exc.code == "demand-too-large" else EXIT_VALIDATION
    except (TraceError, NetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InvariantViolation, AccountingError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
