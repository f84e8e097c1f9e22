"""Command-line frontend.

Subcommands: ``rates`` (merger-rate tables), ``simulate`` (per-replicate tree
summaries), ``cpp-window`` (window atoms of the limiting point process), and
``verify`` (registered experiments, or ``all`` for the full suite).  Exit
codes: 0 success/pass, 1 verification failure, 2 usage or parameter error.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__, coalescent, rates
from .experiments import DEFAULT_SEED, EXPERIMENTS, run_experiment
from .numerics import make_alpha_params
from .sampling import RandomStream


def _parse_alpha(text: str):
    """Decimal string or a symbolic boundary tag, resolved exactly once."""
    if text in ("golden", "sqrt2"):
        return make_alpha_params(text)
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a decimal or golden/sqrt2: {text!r}")
    if not 1.0 < a < 2.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (1, 2), got {text}")
    return make_alpha_params(a)


@contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _header(fh, args, fmt: str):
    if fmt == "csv":
        fh.write(f"# betacoal {__version__}\n")
        fh.write(f"# command: {' '.join(sys.argv[1:]) or args.command}\n")
        fh.write(f"# alpha={args.alpha.alpha!r} seed={getattr(args, 'seed', DEFAULT_SEED)}\n")


def _cmd_rates(args) -> int:
    p = args.alpha
    with _open_out(args.out) as fh:
        if args.format == "json":
            rows = []
            for m in range(2, args.m + 1):
                pmf = rates.jump_pmf_vector(m, p)
                for k in range(2, m + 1):  # k blocks merge, landing at l = m-k+1
                    rows.append(
                        {"m": m, "l": m - k + 1, "rate": rates.merge_rate(m, k, p),
                         "prob": float(pmf[k - 2])}
                    )
            json.dump({"version": __version__, "alpha": p.alpha, "rows": rows}, fh, indent=2)
            fh.write("\n")
        else:
            _header(fh, args, "csv")
            fh.write("m,l,rate,prob\n")
            for m in range(2, args.m + 1):
                pmf = rates.jump_pmf_vector(m, p)
                for k in range(2, m + 1):
                    fh.write(f"{m},{m - k + 1},{rates.merge_rate(m, k, p)!r},{float(pmf[k - 2])!r}\n")
    return 0


def _cmd_simulate(args) -> int:
    p = args.alpha
    rows = []
    for i in range(args.reps):
        st = RandomStream(seed=args.seed, stream_id=i)
        path = coalescent.simulate_path(args.n, st, p)
        length = coalescent.tree_length(path)
        row = {"replicate": i, "length": length, "tau": path.tau}
        if args.theta is not None:
            row["sites"] = coalescent.segregating_sites(length, args.theta, st)
        rows.append(row)
    with _open_out(args.out) as fh:
        if args.format == "json":
            json.dump(
                {"version": __version__, "alpha": p.alpha, "seed": args.seed,
                 "n": args.n, "rows": rows},
                fh, indent=2,
            )
            fh.write("\n")
        else:
            _header(fh, args, "csv")
            cols = list(rows[0]) if rows else ["replicate", "length", "tau"]
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(",".join(repr(row[c]) for c in cols) + "\n")
    return 0


def _cmd_cpp_window(args) -> int:
    p = args.alpha
    with _open_out(args.out) as fh:
        if args.format == "json":
            out = {"version": __version__, "alpha": p.alpha, "seed": args.seed,
                   "window": [args.a, args.b], "start_n": args.start_n, "atoms": []}
            for i in range(args.reps):
                st = RandomStream(seed=args.seed, stream_id=i)
                pp = coalescent.cpp_infinity_window(args.a, args.b, args.start_n, st, p)
                out["atoms"].append([int(x) for x in pp.atoms])
            json.dump(out, fh, indent=2)
            fh.write("\n")
        else:
            _header(fh, args, "csv")
            fh.write("replicate,atom\n")
            for i in range(args.reps):
                st = RandomStream(seed=args.seed, stream_id=i)
                pp = coalescent.cpp_infinity_window(args.a, args.b, args.start_n, st, p)
                for x in pp.atoms:
                    fh.write(f"{i},{int(x)}\n")
    return 0


def _cmd_verify(args) -> int:
    ids = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    if args.experiment != "all" and args.experiment not in EXPERIMENTS:
        print(f"unknown experiment {args.experiment!r}; known: {', '.join(EXPERIMENTS)}",
              file=sys.stderr)
        return 2
    reports = []
    for eid in ids:
        rep = run_experiment({"experiment": eid, "seed": args.seed, "threads": args.threads})
        reports.append(rep)
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {eid} ({rep.runtime_seconds:.1f}s)", file=sys.stderr)
    all_passed = all(r.passed for r in reports)
    with _open_out(args.out) as fh:
        if args.format == "json":
            payload = {
                "version": __version__,
                "seed": args.seed,
                "reports": [r.to_dict(include_runtime=not args.no_runtime) for r in reports],
                "passed": all_passed,
            }
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        else:
            fh.write(f"# betacoal {__version__}\n")
            fh.write(f"# command: {' '.join(sys.argv[1:])}\n")
            fh.write(f"# seed={args.seed}\n")
            fh.write("experiment,passed,detail\n")
            for r in reports:
                detail = ";".join(f"{k}={r.statistics[k]!r}" for k in sorted(r.statistics))
                fh.write(f"{r.experiment_id},{r.passed},{detail}\n")
    return 0 if all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="betacoal")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, need_alpha=True):
        if need_alpha:
            sp.add_argument("--alpha", type=_parse_alpha, required=True)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("rates", help="merger-rate and jump-probability table")
    common(sp)
    sp.add_argument("--m", type=int, required=True)
    sp.set_defaults(fn=_cmd_rates)

    sp = sub.add_parser("simulate", help="per-replicate tree length, depth, sites")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--theta", type=float, default=None)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("cpp-window", help="window atoms of the limiting point process")
    common(sp)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--start-n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=1)
    sp.set_defaults(fn=_cmd_cpp_window)

    sp = sub.add_parser("verify", help="run a registered experiment, or 'all'")
    sp.add_argument("experiment")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=["csv", "json"], default="json")
    sp.add_argument("--no-runtime", action="store_true",
                    help="omit runtime fields (for byte-identical reruns)")
    sp.set_defaults(fn=_cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        if hasattr(args, "reps") and args.reps < 1:
            print("reps must be >= 1", file=sys.stderr)
            return 2
        return args.fn(args)
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
