"""Recovery metrics over a path, stability-based penalty selection, and the
timing benchmark harness.

Edges are upper-triangle (i < j) pairs throughout; a symmetric nonzero pair
of matrix entries counts as one selected edge.
"""

import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .covariance import Dataset, DatasetCollection, estimate_correlation
from .datagen import random_transform_set, sample_npn, seed_sequence, synthetic_instance
from .exceptions import NoStableLambda, OutOfRange
from .pathsolver import compute_path, interpolate
from .proximal import proximal_gradient_solve

__all__ = [
    "PRPoint",
    "PRCurve",
    "StabilityProfile",
    "precision_recall",
    "stars_select",
    "subsample_collection",
    "timing_benchmark",
    "default_lambda_grid",
]


def default_lambda_grid(lo=0.1, hi=2.0, n=50, log=True):
    """Descending penalty grid; log-spaced unless `log` is False."""
    if not (0 < lo < hi and n >= 1):
        raise ValueError("need 0 < lo < hi and n >= 1")
    grid = np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)
    return grid[::-1].copy()


@dataclass(frozen=True)
class PRPoint:
    lam: float
    precision: float
    recall: float
    n_selected: int


@dataclass(frozen=True)
class PRCurve:
    points: tuple
    ground_truth_size: int

    def area(self):
        """Trapezoid area under (recall, precision); max precision per recall."""
        best = {}
        for p in self.points:
            best[p.recall] = max(best.get(p.recall, 0.0), p.precision)
        recalls = np.array(sorted(best))
        precisions = np.array([best[r] for r in recalls])
        if recalls[0] > 0.0:
            recalls = np.concatenate(([0.0], recalls))
            precisions = np.concatenate(([precisions[0]], precisions))
        return float(np.trapezoid(precisions, recalls))


def _check_truth(truth):
    truth = {(int(i), int(j)) for i, j in truth}
    if not truth:
        raise ValueError("ground-truth edge set must be non-empty")
    if any(i >= j for i, j in truth):
        raise ValueError("ground truth must use upper-triangle pairs (i < j)")
    return truth


def precision_recall(path, truth):
    """Precision and recall of each knot's selected edge set.

    An empty selection scores precision 1 by convention (the 0/0 case).
    """
    truth = _check_truth(truth)
    points = []
    for knot in path.knots:
        selected = knot.delta.support_pairs()
        tp = len(selected & truth)
        precision = tp / len(selected) if selected else 1.0
        recall = tp / len(truth)
        points.append(PRPoint(knot.lam, precision, recall, len(selected)))
    return PRCurve(tuple(points), len(truth))


@dataclass(frozen=True)
class StabilityProfile:
    lambdas: np.ndarray  # descending grid
    instability: np.ndarray  # NaN where some repeat's path did not reach
    chosen_lambda: float
    threshold: float


def subsample_collection(coll, fraction, rng):
    """Subsample each dataset without replacement at the given fraction."""
    out = []
    for ds in coll:
        size = int(np.ceil(fraction * ds.m))
        if size < 2:
            raise ValueError(
                f"subsample of dataset '{ds.source_id}' would have {size} < 2 rows"
            )
        idx = np.sort(rng.choice(ds.m, size=size, replace=False))
        out.append(Dataset(ds.samples[idx], source_id=ds.source_id))
    return DatasetCollection(tuple(out))


def stars_select(
    group_a,
    group_b,
    repeats=10,
    fraction=0.8,
    threshold=0.001,
    lambda_grid=None,
    c=100,
    mu=0.0,
    seed=None,
):
    """Pick the densest penalty level whose edge selection is stable.

    Each repeat subsamples every dataset at `fraction`, reruns the full
    pipeline (correlation estimation per group, path, interpolation on the
    shared grid) and records per-edge selections. Instability at a grid
    value is the mean over all upper-triangle pairs of 2*theta*(1-theta),
    theta the selection frequency. The running supremum over levels >= lam
    monotonizes the profile; the chosen level is the smallest grid value
    whose supremum stays at or below `threshold`. Grid values not covered by
    every repeat's path count as unstable.

    Returns (chosen_lambda, full-data solution there, StabilityProfile);
    raises NoStableLambda (carrying the profile) when nothing qualifies.
    """
    if lambda_grid is None:
        lambda_grid = default_lambda_grid()
    grid = np.sort(np.asarray(lambda_grid, dtype=float))[::-1]
    if grid.size == 0:
        raise ValueError("lambda grid must be non-empty")
    d = group_a.dim
    n_pairs = d * (d - 1) // 2
    lambda_floor = float(grid[-1])

    children = seed_sequence(seed).spawn(repeats)
    covered = np.zeros(grid.size, dtype=int)
    selection_counts = [defaultdict(int) for _ in grid]
    for child in children:
        rng = np.random.default_rng(child)
        sub_a = subsample_collection(group_a, fraction, rng)
        sub_b = subsample_collection(group_b, fraction, rng)
        path = compute_path(
            estimate_correlation(sub_a, mu=mu),
            estimate_correlation(sub_b, mu=mu),
            c=c,
            lambda_min=lambda_floor,
        )
        for gi, lam in enumerate(grid):
            try:
                delta = interpolate(path, lam)
            except OutOfRange:
                continue
            covered[gi] += 1
            for pair in delta.support_pairs():
                selection_counts[gi][pair] += 1

    instability = np.full(grid.size, np.nan)
    for gi in range(grid.size):
        if covered[gi] == repeats:
            if selection_counts[gi]:
                theta = np.array(list(selection_counts[gi].values())) / repeats
                instability[gi] = float(np.sum(2.0 * theta * (1.0 - theta)) / n_pairs)
            else:
                instability[gi] = 0.0

    chosen = None
    running = 0.0
    for gi in range(grid.size):  # descending: supremum over lam' >= lam
        running = max(running, np.inf if np.isnan(instability[gi]) else instability[gi])
        if running <= threshold:
            chosen = float(grid[gi])
    profile = StabilityProfile(grid, instability, chosen if chosen is not None else np.nan, threshold)
    if chosen is None:
        raise NoStableLambda(profile)

    full_path = compute_path(
        estimate_correlation(group_a, mu=mu),
        estimate_correlation(group_b, mu=mu),
        c=c,
        lambda_min=lambda_floor,
    )
    return chosen, interpolate(full_path, chosen), profile


BENCH_METHODS = ("path", "apgd5", "apgd_converged")

_SWEEP_PRESETS = {
    "apgd5": {"max_iter": 5, "tol": 0.0},
    "apgd_converged": {"max_iter": 10000, "tol": 1e-8},
}


def timing_benchmark(spec, seed=None, methods=BENCH_METHODS):
    """Wall-time comparison of the exact path against fixed-level solves.

    `spec` maps {d, m, n_seeds, c, lambda_grid}; each seed builds one
    synthetic instance, estimates correlations once, then times the
    requested methods on the same inputs: the path solver, a 5-iteration
    accelerated sweep of the grid, and a converged accelerated sweep.
    Returns (timing rows, per-seed path PR rows); one timing row per
    (method, seed) with wall milliseconds and the knot / grid count.
    """
    unknown = [name for name in methods if name not in BENCH_METHODS]
    if unknown:
        raise ValueError(f"unknown benchmark methods: {unknown}")
    d = int(spec["d"])
    m = int(spec["m"])
    n_seeds = int(spec.get("n_seeds", 1))
    c = int(spec.get("c", 100))
    k_changes = int(spec.get("k_changes", 20))
    grid = np.asarray(
        spec.get("lambda_grid") if spec.get("lambda_grid") is not None else default_lambda_grid(),
        dtype=float,
    )
    rows = []
    pr_rows = []
    children = seed_sequence(seed).spawn(n_seeds)
    for seed_idx, child in enumerate(children):
        streams = child.spawn(3)
        inst = synthetic_instance(d, k_changes=k_changes, seed=streams[0])
        coll_a = DatasetCollection(
            (sample_npn(inst.sigma, random_transform_set(d, streams[1]), m, seed=streams[1]),)
        )
        coll_b = DatasetCollection(
            (sample_npn(inst.sigma_prime, random_transform_set(d, streams[2]), m, seed=streams[2]),)
        )
        s_hat = estimate_correlation(coll_a)
        sp_hat = estimate_correlation(coll_b)

        if "path" in methods:
            start = time.perf_counter()
            path = compute_path(s_hat, sp_hat, c=c, lambda_min=0.0)
            rows.append(
                {
                    "method": "path",
                    "d": d,
                    "m": m,
                    "seed": seed_idx,
                    "wall_ms": 1e3 * (time.perf_counter() - start),
                    "knots": len(path.knots),
                }
            )
            for point in precision_recall(path, inst.truth).points:
                pr_rows.append(
                    {
                        "seed": seed_idx,
                        "method": "path",
                        "lambda": point.lam,
                        "precision": point.precision,
                        "recall": point.recall,
                        "n_selected": point.n_selected,
                    }
                )

        for method in methods:
            if method == "path":
                continue
            start = time.perf_counter()
            for lam in grid:
                proximal_gradient_solve(s_hat, sp_hat, lam, accelerate=True, **_SWEEP_PRESETS[method])
            rows.append(
                {
                    "method": method,
                    "d": d,
                    "m": m,
                    "seed": seed_idx,
                    "wall_ms": 1e3 * (time.perf_counter() - start),
                    "knots": int(grid.size),
                }
            )
    return rows, pr_rows
