"""Command line front end: ``realvar solve``, ``realvar bench`` and ``realvar schema``."""

import argparse
import json
import logging
import os
import sys as _sys

from realvar import corpus, pp, report
from realvar.parse import ParseError, parse_system

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2


def _read_system(arg):
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return parse_system(fh.read())
    name = os.path.splitext(os.path.basename(arg))[0]
    if name in corpus.SYSTEMS:
        return corpus.load(name)
    raise FileNotFoundError(f"{arg}: no such file or embedded system")


def _solve(args):
    system = _read_system(args.file)
    cfg = pp.SolveConfig(
        mode=args.mode,
        criterion=args.criterion,
        policy=args.policy,
        t_start=args.t_start,
        t_max=args.t_max,
        rank_tol=args.rank_tol,
        imag_tol=args.imag_tol,
        residual_tol=args.residual_tol,
        seed=args.seed,
        basis=args.basis,
        plus_rule=args.plus_rule,
        t_extra=args.t_extra,
        output="json" if args.json else "table",
    )
    result = pp.solve(system, cfg)
    if args.json:
        print(json.dumps(report.result_to_json(system, result), indent=2))
    else:
        print(report.render_result(system, result))
    return EXIT_EXHAUSTED if result.status == "incomplete" else EXIT_OK


def _bench(args):
    from realvar import bench

    if args.list:
        for name in bench.CRITERIA:
            print(name)
        return EXIT_OK
    names = list(bench.CRITERIA) if args.all or not args.names else args.names
    ok = True
    for outcome in bench.run(names, stream=_sys.stdout):
        ok &= outcome.passed
    return EXIT_OK if ok else EXIT_ERROR


def _schema(args):
    print(json.dumps(report.SOLVE_SCHEMA, indent=2))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="realvar", description="Real roots of polynomial systems by prolongation-projection.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress (-vv for debug)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a system given as a .sys file or an embedded corpus name")
    s.add_argument("file", metavar="FILE")
    s.add_argument("--mode", choices=pp.MODES, default="real")
    s.add_argument("--criterion", choices=pp.CRITERIA, default="dims")
    s.add_argument("--policy", choices=pp.POLICIES, default="extended")
    s.add_argument("--t-start", type=int)
    s.add_argument("--t-max", type=int)
    s.add_argument("--t-extra", type=int, default=0, help="orders to continue after the first extraction")
    s.add_argument("--rank-tol", type=float, help="relative tolerance for the G_t kernels")
    s.add_argument("--imag-tol", type=float, default=pp.extract.DEFAULT_IMAG_TOL)
    s.add_argument("--residual-tol", type=float, default=pp.extract.DEFAULT_RESIDUAL_TOL)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--basis", choices=("greedy", "pivots"), default="greedy")
    s.add_argument("--plus-rule", choices=pp.PLUS_RULES, default="prolonged")
    s.add_argument("--json", action="store_true", help="print the versioned JSON document")
    s.set_defaults(func=_solve)

    b = sub.add_parser("bench", help="run the acceptance checks on the embedded corpus")
    b.add_argument("names", nargs="*", metavar="NAME")
    b.add_argument("--all", action="store_true")
    b.add_argument("--list", action="store_true", help="list check names")
    b.set_defaults(func=_bench)

    j = sub.add_parser("schema", help="print the JSON schema of solve --json")
    j.set_defaults(func=_schema)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"realvar: {args.file}: {exc}", file=_sys.stderr)
    except KeyError as exc:
        print(f"realvar: {exc.args[0]}", file=_sys.stderr)
    except (FileNotFoundError, ValueError) as exc:
        print(f"realvar: {exc}", file=_sys.stderr)
    except Exception as exc:  # numerical failures surface here
        print(f"realvar: {type(exc).__name__}: {exc}", file=_sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    _sys.exit(main())
