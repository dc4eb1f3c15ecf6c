"""Command-line interface.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain error.
Tables are written as CSV, single reports as JSON.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import bounds, checks, montecarlo
from .errors import ExpsampError
from .walk import (
    indicator_marking,
    load_marking,
    load_matrix,
    make_complete_with_loops,
    make_interpolation,
    make_random_regular,
    make_two_state_chain,
    random_density_marking,
    sample_walk,
    save_matrix,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(ExpsampError):
    pass


# -- shared argument groups ------------------------------------------------


def _add_graph_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--complete", action="store_true", help="complete graph with self-loops")
    src.add_argument("--interpolation", action="store_true", help="lam*I + (1-lam)*J")
    src.add_argument("--two-state", action="store_true", help="two-state sticky chain")
    src.add_argument("--random-regular", action="store_true", help="random d-regular multigraph")
    src.add_argument("--matrix-file", type=Path, help="walk matrix file")
    p.add_argument("--N", type=int, help="number of vertices")
    p.add_argument("--d", type=int, help="degree (random regular)")
    p.add_argument("--lam", type=float, help="spectral parameter")
    p.add_argument("--mu", type=float, help="marked fraction")
    p.add_argument("--seed", type=int, default=0)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + n for n in missing))


def build_operator(args):
    if args.complete:
        _need(args, "N")
        return make_complete_with_loops(args.N)
    if args.interpolation:
        _need(args, "N", "lam")
        return make_interpolation(args.N, args.lam)
    if args.two_state:
        _need(args, "lam", "mu")
        return make_two_state_chain(args.lam, args.mu)
    if args.random_regular:
        _need(args, "N", "d")
        return make_random_regular(args.N, args.d, args.seed)
    return load_matrix(args.matrix_file)


def _add_marking_source(p):
    p.add_argument("--n", type=int, required=True, help="walk length")
    p.add_argument("--marking-file", type=Path, help="marking file (overrides --mu)")
    p.add_argument("--marking-seed", type=int, default=0)


def build_marking(args, op):
    """Marking file, else the marked state of a two-state chain, else a random --mu set."""
    if args.marking_file is not None:
        marks = load_marking(args.marking_file, weights=op.stationary)
        if marks.n_steps != args.n:
            raise UsageError(f"marking file has {marks.n_steps} functions, --n is {args.n}")
        return marks
    if args.two_state:
        return indicator_marking(op, args.n, [0])
    _need(args, "mu")
    return random_density_marking(op, args.n, args.mu, args.marking_seed)


# -- output helpers --------------------------------------------------------


def _emit(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _fmt(x):
    return repr(float(x)) if isinstance(x, float) else str(x)


def rows_to_csv(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return out.getvalue()


def _table(header, rows, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows]) + "\n"
    return rows_to_csv(header, rows)


# -- commands --------------------------------------------------------------


def cmd_graph(args):
    op = build_operator(args)
    report = {"N": op.n_vertices, "d": op.degree, "lambda": op.lam}
    if op.lam >= 1.0 - 1e-12:
        print("warning: lambda = 1, the concentration bounds do not apply", file=sys.stderr)
    if args.write_matrix is not None:
        save_matrix(op, args.write_matrix)
    _emit(json.dumps(report) + "\n", args.output)
    return EXIT_OK


def cmd_sample(args):
    op = build_operator(args)
    marks = build_marking(args, op)
    walk = sample_walk(op, marks, args.walk_seed)
    report = {
        "vertices": list(walk.vertices),
        "z_values": list(walk.z_values),
        "s_n": walk.s_n,
        "seed_bits": walk.seed_bits,
    }
    _emit(json.dumps(report) + "\n", args.output)
    return EXIT_OK


def cmd_bound(args):
    if args.thm1:
        _need(args, "alpha")
        report = bounds.mgf_report(args.lam, args.alpha, args.phi)
    elif args.cor2:
        _need(args, "t")
        report = bounds.tail_report(args.lam, args.t, args.phi)
    else:
        _need(args, "alpha")
        log_value = math.log(bounds.mgf_series_truncated(args.lam, args.alpha, args.phi, args.Q))
        report = bounds.BoundReport(
            "series_truncated",
            math.exp(log_value),
            log_value,
            bounds.BoundParams(args.lam, args.phi, alpha=args.alpha),
        )
    _emit(report.to_json() + "\n", args.output)
    return EXIT_OK


VERIFY_HEADER = ("check_name", "instances", "max_violation", "pass")


def cmd_verify(args):
    results = checks.run_all(seed=args.seed, trials=args.trials, inject_bug=args.inject_bug)
    rows = [(r.name, r.instances, float(r.max_violation), r.passed) for r in results]
    _emit(rows_to_csv(VERIFY_HEADER, rows), args.output)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


SHARPNESS_HEADER = ("n", "exact_mgf", "limit_value", "gap")


def cmd_sharpness(args):
    rows = checks.sharpness_table(args.lam, args.phi, args.alpha, args.n)
    _emit(_table(SHARPNESS_HEADER, rows, args.format), args.output)
    return EXIT_OK


TAIL_HEADER = ("t", "empirical", "ci_low", "ci_high", "cor2_bound", "log_ratio")


def tail_rows(op, marks, ts, samples, seed, shards):
    if not marks.phi > 0:
        raise UsageError("the marking has phi = 0; tail experiments need phi > 0")
    rows = []
    for t in ts:
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        est = montecarlo.estimate_tail(op, marks, t, samples, seed, shards)
        if op.lam > 0 and t * op.lam > 1.0:
            log_bound = bounds.log_tail_bound_cor2(op.lam, t, marks.phi)
            bound = math.exp(log_bound)
            log_ratio = math.log(est.point_estimate) - log_bound if est.point_estimate > 0 else -math.inf
        else:
            bound, log_ratio = "N/A", "N/A"
        rows.append((float(t), est.point_estimate, est.ci_low, est.ci_high, bound, log_ratio))
    return rows


def cmd_tail_experiment(args):
    op = build_operator(args)
    marks = build_marking(args, op)
    rows = tail_rows(op, marks, args.t, args.samples, args.seed, args.shards)
    _emit(_table(TAIL_HEADER, rows, args.format), args.output)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="expsamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="build a walk operator and report its lambda")
    _add_graph_source(p)
    p.add_argument("--write-matrix", type=Path, help="save the operator as a matrix file")
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("sample", help="draw one seeded walk")
    _add_graph_source(p)
    _add_marking_source(p)
    p.add_argument("--walk-seed", type=int, default=0)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bound", help="evaluate a closed-form bound")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--thm1", action="store_true", help="MGF bound")
    kind.add_argument("--cor2", action="store_true", help="tail bound")
    kind.add_argument("--series", action="store_true", help="truncated moment series")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--Q", type=int, default=bounds.DEFAULT_TRUNCATION)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="run every randomized verification suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--output", type=Path)
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sharpness", help="two-state MGF versus its n -> infinity limit")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, nargs="+", default=[8, 32, 128, 512])
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("tail-experiment", help="empirical tails against the tail bound")
    _add_graph_source(p)
    _add_marking_source(p)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--shards", type=int, default=8)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_tail_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ExpsampError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
