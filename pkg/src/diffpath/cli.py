"""Command-line entry point.

Subcommands: `estimate` (manifest in, correlations + path + edge list out),
`simulate` (synthetic datasets + ground truth out), `bench` (timing and
accuracy tables out). Every run echoes its resolved configuration to the
output directory; all randomness flows from the single --seed.

Exit codes: 0 success, 2 malformed input or parameters, 3 no stable penalty
level, 4 numerical degeneracy.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .covariance import estimate_correlation
from .evaluation import BENCH_METHODS, default_lambda_grid, stars_select, timing_benchmark
from .exceptions import (
    DiffPathError,
    DimensionMismatch,
    NoStableLambda,
    NotPSD,
    NotSymmetric,
    OutOfRange,
    SingularActiveSet,
)
from .datagen import sample_collection, synthetic_instance
from .pathsolver import compute_path, interpolate

_EXIT_OK = 0
_EXIT_INPUT = 2
_EXIT_NO_STABLE_LAMBDA = 3
_EXIT_NUMERICAL = 4

_INPUT_ERRORS = (
    ValueError,
    TypeError,
    KeyError,
    FileNotFoundError,
    IsADirectoryError,
    DimensionMismatch,
    NotSymmetric,
    json.JSONDecodeError,
)
_NUMERICAL_ERRORS = (NotPSD, SingularActiveSet, OutOfRange, np.linalg.LinAlgError)


def parse_grid(text):
    """Grid spec "lo:hi:n:log|lin" -> descending array."""
    parts = text.split(":")
    if len(parts) != 4 or parts[3] not in ("log", "lin"):
        raise ValueError(f"grid must be 'lo:hi:n:log|lin', got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    return default_lambda_grid(lo, hi, n, log=parts[3] == "log")


def _add_common(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap on BLAS threads (default: env DIFFPATH_THREADS, else unlimited)",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="diffpath", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate a differential network from two dataset groups")
    _add_common(est)
    est.add_argument("--manifest", required=True, help="collection manifest JSON")
    est.add_argument("--c", type=int, default=100, help="active-entry budget of the path")
    est.add_argument("--lambda", dest="lam", type=float, default=None, help="fixed penalty level (default: stability selection)")
    est.add_argument("--lambda-min", type=float, default=0.0)
    est.add_argument("--grid", type=parse_grid, default="0.1:2:50:log")
    est.add_argument("--mu", type=float, default=1e-8, help="PSD projection clip parameter")
    est.add_argument("--stars-repeats", type=int, default=10)
    est.add_argument("--stars-fraction", type=float, default=0.8)
    est.add_argument("--stars-threshold", type=float, default=0.001)

    sim = sub.add_parser("simulate", help="generate synthetic dataset groups plus ground truth")
    _add_common(sim)
    sim.add_argument("--d", type=int, default=50)
    sim.add_argument("--k-changes", type=int, default=20, help="total differential edges (half deleted, half inserted)")
    sim.add_argument("--datasets-per-group", type=int, default=4)
    sim.add_argument("--m-per-dataset", type=int, default=200)
    sim.add_argument("--attach-m", type=int, default=1)
    sim.add_argument("--gamma-margin", type=float, default=0.05)

    ben = sub.add_parser("bench", help="time the path against fixed-level sweeps")
    _add_common(ben)
    ben.add_argument("--d", type=int, default=50)
    ben.add_argument("--m", type=int, default=500)
    ben.add_argument("--n-seeds", type=int, default=3)
    ben.add_argument("--c", type=int, default=100)
    ben.add_argument("--k-changes", type=int, default=20)
    ben.add_argument("--grid", type=parse_grid, default="0.1:2:50:log")
    ben.add_argument(
        "--methods",
        default=",".join(BENCH_METHODS),
        help=f"comma-separated subset of {','.join(BENCH_METHODS)}",
    )
    return parser


def _echo_config(args, outdir):
    config = {k: v for k, v in vars(args).items() if k != "grid"}
    if hasattr(args, "grid") and args.grid is not None:
        grid = args.grid if isinstance(args.grid, np.ndarray) else parse_grid(args.grid)
        config["grid"] = [float(x) for x in grid]
    config["version"] = __version__
    io.write_json(outdir / "run_config.json", config)


def _resolve_grid(args):
    return args.grid if isinstance(args.grid, np.ndarray) else parse_grid(args.grid)


def cmd_estimate(args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _echo_config(args, outdir)
    group_a, group_b, names = io.load_manifest(args.manifest)

    sigma = estimate_correlation(group_a, mu=args.mu)
    sigma_prime = estimate_correlation(group_b, mu=args.mu)
    io.write_matrix_csv(outdir / "sigma_a.csv", sigma, names)
    io.write_matrix_csv(outdir / "sigma_b.csv", sigma_prime, names)

    grid = _resolve_grid(args)
    if args.lam is not None:
        path = compute_path(sigma, sigma_prime, c=args.c, lambda_min=args.lambda_min)
        chosen = args.lam
        delta = interpolate(path, chosen)
    else:
        chosen, delta, profile = stars_select(
            group_a,
            group_b,
            repeats=args.stars_repeats,
            fraction=args.stars_fraction,
            threshold=args.stars_threshold,
            lambda_grid=grid,
            c=args.c,
            mu=args.mu,
            seed=args.seed,
        )
        io.write_stability_csv(outdir / "stability.csv", profile)
        path = compute_path(sigma, sigma_prime, c=args.c, lambda_min=float(grid.min()))

    io.write_json(outdir / "path.json", io.path_to_dict(path))
    io.write_edge_list_tsv(outdir / "edges.tsv", delta, names)
    io.write_json(
        outdir / "summary.json",
        {
            "d": path.dim,
            "chosen_lambda": float(chosen),
            "n_edges": len(delta.support_pairs()),
            "n_knots": len(path.knots),
            "termination_reason": path.termination_reason,
        },
    )
    return _EXIT_OK


def cmd_simulate(args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _echo_config(args, outdir)
    names = tuple(f"x{j}" for j in range(args.d))

    children = np.random.SeedSequence(args.seed).spawn(3)
    inst = synthetic_instance(
        args.d,
        k_changes=args.k_changes,
        attach_m=args.attach_m,
        gamma_margin=args.gamma_margin,
        seed=children[0],
    )
    manifest = {"group_a": [], "group_b": []}
    for group, sigma, child in (
        ("group_a", inst.sigma, children[1]),
        ("group_b", inst.sigma_prime, children[2]),
    ):
        coll = sample_collection(
            sigma, args.datasets_per_group, args.m_per_dataset, seed=child, prefix=f"{group}_"
        )
        for idx, ds in enumerate(coll):
            fname = f"{group}_{idx}.csv"
            io.write_dataset_csv(outdir / fname, ds.samples, names)
            manifest[group].append({"path": fname, "source_id": ds.source_id})
    io.write_json(outdir / "manifest.json", manifest)
    io.write_json(
        outdir / "truth.json",
        {
            "true_delta_support": sorted([i, j] for i, j in inst.truth),
            "omega_spectra": {
                "omega": [float(x) for x in np.linalg.eigvalsh(inst.pair.omega)],
                "omega_prime": [float(x) for x in np.linalg.eigvalsh(inst.pair.omega_prime)],
            },
            "seeds": {"master": args.seed},
            "parameters": {
                "d": args.d,
                "k_changes": args.k_changes,
                "datasets_per_group": args.datasets_per_group,
                "m_per_dataset": args.m_per_dataset,
                "attach_m": args.attach_m,
                "gamma_margin": args.gamma_margin,
            },
        },
    )
    return _EXIT_OK


def cmd_bench(args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    unknown = [m for m in methods if m not in BENCH_METHODS]
    if unknown:
        raise ValueError(f"unknown benchmark methods: {unknown}")
    _echo_config(args, outdir)
    grid = _resolve_grid(args)
    spec = {
        "d": args.d,
        "m": args.m,
        "n_seeds": args.n_seeds,
        "c": args.c,
        "k_changes": args.k_changes,
        "lambda_grid": grid,
    }
    rows, pr_rows = timing_benchmark(spec, seed=args.seed, methods=methods)
    io.write_timing_csv(outdir / "timing.csv", rows)
    io.write_pr_csv(outdir / "pr_curves.csv", pr_rows)
    totals = {}
    for row in rows:
        totals.setdefault(row["method"], 0.0)
        totals[row["method"]] += row["wall_ms"]
    io.write_json(outdir / "summary.json", {"total_wall_ms": totals, "spec": {k: (list(map(float, v)) if isinstance(v, np.ndarray) else v) for k, v in spec.items()}})
    return _EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        # argparse exits 2 on bad flags, which matches the input-error code
        return int(ex.code) if ex.code else _EXIT_OK

    threads = args.threads
    if threads is None:
        env = os.environ.get("DIFFPATH_THREADS", "")
        threads = int(env) if env.isdigit() else None

    handlers = {"estimate": cmd_estimate, "simulate": cmd_simulate, "bench": cmd_bench}
    run = handlers[args.command]
    try:
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                return run(args)
        return run(args)
    except NoStableLambda as ex:
        print(f"diffpath: {ex}", file=sys.stderr)
        return _EXIT_NO_STABLE_LAMBDA
    except _NUMERICAL_ERRORS as ex:
        print(f"diffpath: numerical failure: {ex}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except _INPUT_ERRORS as ex:
        print(f"diffpath: invalid input: {ex}", file=sys.stderr)
        return _EXIT_INPUT
    except DiffPathError as ex:
        print(f"diffpath: {ex}", file=sys.stderr)
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
