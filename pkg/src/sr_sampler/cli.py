"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 verification failure, 64 usage error.
``SR_SAMPLER_THREADS`` caps BLAS threads (0 or unset = library default).
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from .bench import BenchRow, run_bench
from .core import enumerate_distribution
from .dpp import KernelDPP
from .errors import InfeasibleK, SamplerError
from .fileio import (format_overestimates, format_samples, parse_graph, parse_kernel,
                     read_overestimates)
from .isotropy import estimate_overestimates
from .sparsifier import Mode, SparsifierConfig, draw_samples
from .spanning_tree import SpanningTreeModel
from .stats import concentration_experiment, estimate_tv, mixing_curve

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_CHAIN_CAP = 4096


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rounds(text):
    if text.lower() == "auto":
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("rounds must be a positive integer or 'auto'")
    return value


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _shared(p, samples=1):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--rounds", type=_rounds, default=None, help="rounds between outputs, or 'auto'")
    p.add_argument("--t-mult", type=float, default=4.0, help="superset size t = ceil(t_mult * K)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DOWN_UP.value)
    p.add_argument("--chains", type=int, default=0,
                   help=f"lockstep chains (0 = min(samples, {DEFAULT_CHAIN_CAP}))")
    p.add_argument("--marginals", help="file of precomputed overestimates, one per line")
    p.add_argument("--sample-constant", type=float, default=100.0)
    p.add_argument("--exact", action="store_true", help="use the baseline sampler only")
    p.add_argument("--out", help="output file (default stdout)")


def _model_args(p, kernel=True, graph=True):
    if kernel:
        p.add_argument("--kernel", help="kernel matrix (CSV or MatrixMarket)")
        p.add_argument("--k", type=int, help="sample size (DPP only)")
    if graph:
        p.add_argument("--graph", help="edge list ('V E' header, then 'u v [weight]')")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sr-sampler", description="Approximate sampling from k-DPPs and spanning trees.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample-dpp", help="draw k-DPP samples")
    _model_args(p, graph=False)
    _shared(p)

    p = sub.add_parser("sample-tree", help="draw weighted spanning trees (as edge indices)")
    _model_args(p, kernel=False)
    _shared(p)

    p = sub.add_parser("estimate-marginals", help="write marginal overestimates")
    _model_args(p)
    _shared(p)

    p = sub.add_parser("verify", help="TV distance of the pipeline against enumeration")
    _model_args(p)
    _shared(p, samples=100_000)
    p.add_argument("--tol", type=float, default=0.05)

    p = sub.add_parser("mix-curve", help="TV after r rounds, as CSV")
    _model_args(p)
    _shared(p, samples=10_000)
    p.add_argument("--grid", type=_int_list, default=[0, 1, 2, 4, 8, 16])
    p.add_argument("--start", type=_int_list, help="fixed start set (default: a baseline draw)")

    p = sub.add_parser("concentration", help="largest restricted marginal vs 2 p_max n / s")
    _model_args(p)
    _shared(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--csv", help="also write the report as CSV")

    p = sub.add_parser("bench", help="per-sample wall clock over a grid of n, as CSV")
    _shared(p, samples=20)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--n-grid", type=_int_list, default=[1024, 4096, 16384])
    p.add_argument("--features", type=int, default=0, help="feature dimension (0 = 8k)")
    return parser


def _load_model(args, tree=None):
    kernel, graph = getattr(args, "kernel", None), getattr(args, "graph", None)
    if tree is None and (kernel is None) == (graph is None):
        raise _UsageError("give exactly one of --kernel or --graph")
    if tree or graph is not None:
        if graph is None:
            raise _UsageError("--graph is required")
        return SpanningTreeModel(parse_graph(graph))
    if kernel is None or args.k is None:
        raise _UsageError("--kernel and --k are required")
    if args.k < 1:
        raise SamplerError(f"k must be positive, got {args.k}")
    model = KernelDPP(parse_kernel(kernel), args.k)
    if model.decomposition.rank < args.k:
        raise InfeasibleK(f"kernel rank {model.decomposition.rank} is below k={args.k}")
    return model


class _UsageError(Exception):
    pass


def _config(args, count):
    chains = args.chains or min(max(count, 1), DEFAULT_CHAIN_CAP)
    return SparsifierConfig(t_multiplier=args.t_mult, rounds=args.rounds, seed=args.seed,
                            mode=Mode(args.mode), chains=chains)


def _overestimates(model, args, rng):
    if args.marginals:
        return read_overestimates(args.marginals, model.n)
    return estimate_overestimates(model, args.sample_constant, rng, _config(args, 1))


def _draw(model, args, rng):
    if args.samples < 0:
        raise SamplerError("--samples must be non-negative")
    if args.exact:
        return model.sample_batch(args.samples, rng)
    q = _overestimates(model, args, rng)
    return draw_samples(model, q, _config(args, args.samples), args.samples, rng)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def cmd_sample(args, out, tree):
    rng = np.random.default_rng(args.seed)
    model = _load_model(args, tree=tree)
    out.write(format_samples(_draw(model, args, rng)))
    return EXIT_OK


def cmd_estimate(args, out):
    rng = np.random.default_rng(args.seed)
    model = _load_model(args)
    q = estimate_overestimates(model, args.sample_constant, rng, _config(args, 1))
    out.write(format_overestimates(q))
    print(f"K={q.K!r} n={q.n} fallbacks={q.fallbacks}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, out):
    rng = np.random.default_rng(args.seed)
    model = _load_model(args)
    table = enumerate_distribution(model)
    est = estimate_tv(_draw(model, args, rng), table)
    ok = est.tv <= args.tol
    out.write(f"tv={est.tv!r}\nse={est.se!r}\nsamples={est.num_samples}\n"
              f"support={len(table)}\ntol={args.tol!r}\nstatus={'pass' if ok else 'fail'}\n")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_mix(args, out):
    rng = np.random.default_rng(args.seed)
    model = _load_model(args)
    q = _overestimates(model, args, rng)
    curve = mixing_curve(model, q, _config(args, args.samples), sorted(args.grid), args.samples,
                         rng, start=args.start)
    curve.to_csv(out)
    return EXIT_OK


def cmd_concentration(args, out):
    model = _load_model(args)
    report = concentration_experiment(model, args.s, args.trials, np.random.default_rng(args.seed))
    out.write("".join(line + "\n" for line in report.lines()))
    if args.csv:
        report.write_csv(args.csv)
    return EXIT_OK


def cmd_bench(args, out):
    cfg = SparsifierConfig(t_multiplier=args.t_mult, rounds=args.rounds, seed=args.seed,
                           mode=Mode(args.mode), chains=args.chains or 1)
    try:
        rows = run_bench(args.n_grid, args.k, args.features or None, args.samples, args.exact, cfg, args.seed)
        out.write(BenchRow.header() + "\n")
        for row in rows:
            out.write(row.csv() + "\n")
            out.flush()
    except ValueError as exc:
        raise SamplerError(str(exc)) from None
    return EXIT_OK


def _dispatch(args, out):
    cmd = args.command
    if cmd == "sample-dpp":
        return cmd_sample(args, out, tree=False)
    if cmd == "sample-tree":
        return cmd_sample(args, out, tree=True)
    if cmd == "estimate-marginals":
        return cmd_estimate(args, out)
    if cmd == "verify":
        return cmd_verify(args, out)
    if cmd == "mix-curve":
        return cmd_mix(args, out)
    if cmd == "concentration":
        return cmd_concentration(args, out)
    return cmd_bench(args, out)


def _thread_limit():
    raw = os.environ.get("SR_SAMPLER_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise SamplerError(f"SR_SAMPLER_THREADS must be an integer, got {raw!r}") from None
    return value if value > 0 else None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        with threadpool_limits(limits=_thread_limit()), _output(args.out) as out:
            return _dispatch(args, out)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sr-sampler: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SamplerError, ValueError, OSError) as exc:
        print(f"sr-sampler: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
