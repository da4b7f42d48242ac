"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria complete. Expected wall time for the whole module is several
minutes; the stated runtime budgets are asserted where given.
"""

import time
import warnings

import numpy as np
from conftest import correlation_pair, materialize_hessian, random_correlation

from diffpath.covariance import (
    Dataset,
    DatasetCollection,
    TiesWarning,
    estimate_correlation,
    kendall_tau,
    kendall_tau_brute,
    tau_matrix,
    tau_to_correlation,
    weighted_tau,
)
from diffpath.datagen import (
    apply_transforms,
    random_transform_set,
    sample_collection,
    sample_npn,
    synthetic_instance,
)
from diffpath.evaluation import default_lambda_grid, precision_recall, PRCurve, PRPoint
from diffpath.hessian import vec_pair
from diffpath.pathsolver import compute_path, interpolate, kkt_check
from diffpath.proximal import proximal_gradient_solve


def report(num, name, ok, detail=""):
    print(f"\nACCEPTANCE {num:02d} [{name}]: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def _protocol_pipeline(inst, collections, c=100):
    s_hat = estimate_correlation(collections[0])
    sp_hat = estimate_correlation(collections[1])
    return compute_path(s_hat, sp_hat, c=c)


def test_criterion_01_kkt_exactness():
    start = time.perf_counter()
    worst_stat = worst_dual = 0.0
    checked = 0
    for idx in range(20):
        d = 10 if idx < 10 else 30
        s, sp = correlation_pair(d, 1000 + idx)
        path = compute_path(s, sp, c=100)
        lams = [k.lam for k in path.knots]
        probe = [(k.delta, k.lam) for k in path.knots if k.lam > 0]
        probe += [
            (interpolate(path, 0.5 * (a + b)), 0.5 * (a + b))
            for a, b in zip(lams, lams[1:])
            if 0.5 * (a + b) > 0
        ]
        for delta, lam in probe:
            rep = kkt_check(delta, lam, s, sp, tol=1e-8)
            worst_stat = max(worst_stat, rep.max_stationarity_residual)
            worst_dual = max(worst_dual, rep.max_dual_violation)
            checked += 1
            assert rep.ok
    elapsed = time.perf_counter() - start
    report(
        1,
        "kkt exactness",
        worst_stat <= 1e-8 and worst_dual <= 1e-8 and elapsed < 60.0,
        f"(checks={checked}, max stationarity={worst_stat:.2e}, "
        f"max dual violation={worst_dual:.2e}, {elapsed:.1f}s < 60s)",
    )


def test_criterion_02_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for idx in range(10):
        s, sp = correlation_pair(20, 2000 + idx)
        path = compute_path(s, sp, c=100)
        lam_hi = path.knots[0].lam
        lam_lo = max(path.knots[-1].lam * 1.001, lam_hi * 1e-3)
        lams = [lam for lam in np.geomspace(lam_hi * 0.98, lam_lo, 10) if lam > path.knots[-1].lam]
        for lam in lams:
            sol = interpolate(path, lam).toarray()
            rep = proximal_gradient_solve(
                s, sp, lam, max_iter=500000, tol=1e-13, stat_tol=1e-10, accelerate=True
            )
            worst = max(worst, float(np.abs(sol - rep.delta).max()))
        assert worst <= 1e-5
    elapsed = time.perf_counter() - start
    report(
        2,
        "oracle equivalence",
        worst <= 1e-5 and elapsed < 300.0,
        f"(max |path - oracle|_inf = {worst:.2e} <= 1e-5, {elapsed:.1f}s < 300s)",
    )


def test_criterion_03_first_knot_law():
    worst = 0.0
    for idx in range(20):
        d = (10, 20, 30)[idx % 3]
        s, sp = correlation_pair(d, 3000 + idx)
        path = compute_path(s, sp, c=50)
        worst = max(worst, abs(path.knots[0].lam - np.abs(s - sp).max()))
    for seed in range(5):
        inst = synthetic_instance(25, k_changes=10, seed=seed)
        coll_a = sample_collection(inst.sigma, 2, 150, seed=seed + 50)
        coll_b = sample_collection(inst.sigma_prime, 2, 150, seed=seed + 90)
        s_hat, sp_hat = estimate_correlation(coll_a), estimate_correlation(coll_b)
        path = compute_path(s_hat, sp_hat, c=50)
        worst = max(worst, abs(path.knots[0].lam - np.abs(s_hat - sp_hat).max()))
    report(3, "first-knot law", worst <= 1e-12, f"(max deviation {worst:.2e} <= 1e-12)")


def test_criterion_04_piecewise_linearity():
    worst = 0.0
    segments = 0
    for idx in range(10):
        s, sp = correlation_pair(20, 2000 + idx)  # same family as criterion 2
        path = compute_path(s, sp, c=100)
        full = materialize_hessian(s, sp)
        v = (sp - s).ravel(order="F")
        for upper, lower in zip(path.knots, path.knots[1:]):
            lam = 0.5 * (upper.lam + lower.lam)
            if lam <= 0:
                continue
            direct = np.zeros((20, 20))
            active = list(lower.active)
            if active:
                sol = -np.linalg.solve(
                    full[np.ix_(active, active)], v[active] + lam * lower.signs
                )
                for pos, e in enumerate(active):
                    i, j = vec_pair(e, 20)
                    direct[i, j] = sol[pos]
            diff = np.abs(interpolate(path, lam).toarray() - direct).max()
            worst = max(worst, float(diff))
            segments += 1
            assert diff <= 1e-10
    report(
        4,
        "piecewise linearity",
        worst <= 1e-10,
        f"(segments={segments}, max midpoint deviation {worst:.2e} <= 1e-10)",
    )


def test_criterion_05_kendall_matches_brute_force():
    rng = np.random.default_rng(5000)
    exact = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiesWarning)
        for trial in range(100):
            m = int(rng.integers(2, 201))
            if trial % 2:
                x = rng.standard_normal(m)
                y = rng.standard_normal(m)
            else:
                x = rng.integers(0, max(2, m // 4), size=m).astype(float)
                y = rng.integers(0, max(2, m // 4), size=m).astype(float)
            assert kendall_tau(x, y) == kendall_tau_brute(x, y)
            exact += 1
    report(5, "kendall correctness", exact == 100, f"({exact}/100 vectors bit-exact)")


def test_criterion_06_concentration_bound():
    rng = np.random.default_rng(600)
    sigma = random_correlation(5, rng)
    m_total, trials = 2000, 200
    thresholds = (0.1, 0.15, 0.2)
    exceed = {t: np.zeros((5, 5)) for t in thresholds}
    for trial in range(trials):
        coll = DatasetCollection(
            (
                sample_npn(sigma, random_transform_set(5, seed=3 * trial), 1200, seed=3 * trial + 1),
                sample_npn(sigma, random_transform_set(5, seed=3 * trial + 2), 800, seed=3 * trial + 2),
            )
        )
        sigma_tilde = tau_to_correlation(weighted_tau(coll))
        err = np.abs(sigma_tilde - sigma)
        for t in thresholds:
            exceed[t] += err >= t
    ok = True
    details = []
    off = ~np.eye(5, dtype=bool)
    for t in thresholds:
        bound = np.exp(-m_total * t * t / (2 * np.pi**2)) + 0.02
        frac = exceed[t] / trials
        worst = frac[off].max()
        details.append(f"t={t}: {worst:.3f} <= {bound:.3f}")
        ok = ok and worst <= bound
    report(6, "concentration bound", ok, "(" + "; ".join(details) + ")")


def test_criterion_07_transform_invariance():
    rng = np.random.default_rng(700)
    identical = 0
    for trial in range(50):
        ds = Dataset(rng.standard_normal((100, 6)))
        tags = random_transform_set(6, seed=trial)
        transformed = Dataset(apply_transforms(ds.samples, tags))
        if np.array_equal(tau_matrix(ds), tau_matrix(transformed)):
            identical += 1
    report(7, "transform invariance", identical == 50, f"({identical}/50 bit-identical)")


def _pr_area_for_collections(inst, coll_a, coll_b, c=100):
    path = _protocol_pipeline(inst, (coll_a, coll_b), c=c)
    return precision_recall(path, inst.truth).area()


def test_criterion_08_heterogeneous_integration():
    start = time.perf_counter()
    areas = {"het": [], "hom": [], "single": []}
    for seed in range(20):
        inst = synthetic_instance(50, k_changes=20, seed=8000 + seed)
        ss = np.random.SeedSequence(8100 + seed).spawn(6)
        scenarios = {
            "het": (
                sample_collection(inst.sigma, 4, 200, seed=ss[0]),
                sample_collection(inst.sigma_prime, 4, 200, seed=ss[1]),
            ),
            "hom": (
                sample_collection(inst.sigma, 1, 800, seed=ss[2]),
                sample_collection(inst.sigma_prime, 1, 800, seed=ss[3]),
            ),
            "single": (
                sample_collection(inst.sigma, 1, 200, seed=ss[4]),
                sample_collection(inst.sigma_prime, 1, 200, seed=ss[5]),
            ),
        }
        for name, (ca, cb) in scenarios.items():
            areas[name].append(_pr_area_for_collections(inst, ca, cb))
    het, hom, single = (float(np.mean(areas[k])) for k in ("het", "hom", "single"))
    elapsed = time.perf_counter() - start
    ok = abs(het - hom) <= 0.1 and het >= single + 0.05 and hom >= single + 0.05
    report(
        8,
        "heterogeneous integration",
        ok and elapsed < 900.0,
        f"(areas: heterogeneous={het:.3f}, homogeneous={hom:.3f}, single={single:.3f}; "
        f"|het-hom|={abs(het - hom):.3f} <= 0.1; gaps {het - single:.3f}, {hom - single:.3f} >= 0.05; "
        f"{elapsed:.0f}s < 900s)",
    )


def _sweep_pr_curve(s_hat, sp_hat, grid, truth, max_iter):
    points = []
    truth = set(truth)
    for lam in grid:
        rep = proximal_gradient_solve(s_hat, sp_hat, lam, accelerate=True, max_iter=max_iter, tol=0.0)
        selected = {
            (min(i, j), max(i, j)) for i, j in zip(*np.nonzero(rep.delta)) if i != j
        }
        tp = len(selected & truth)
        precision = tp / len(selected) if selected else 1.0
        recall = tp / len(truth)
        points.append(PRPoint(float(lam), precision, recall, len(selected)))
    return PRCurve(tuple(points), len(truth))


def test_criterion_09_path_vs_fixed_level_sweeps():
    grid = default_lambda_grid(0.1, 2.0, 50)
    knot_counts = []
    path_areas, sweep_areas = [], []
    path_time = converged_time = 0.0
    for seed in range(20):
        inst = synthetic_instance(50, k_changes=20, seed=9000 + seed)
        ss = np.random.SeedSequence(9100 + seed).spawn(2)
        coll_a = sample_collection(inst.sigma, 1, 1000, seed=ss[0])
        coll_b = sample_collection(inst.sigma_prime, 1, 1000, seed=ss[1])
        s_hat = estimate_correlation(coll_a)
        sp_hat = estimate_correlation(coll_b)

        t0 = time.perf_counter()
        path = compute_path(s_hat, sp_hat, c=100)
        path_time += time.perf_counter() - t0
        knot_counts.append(len(path.knots))
        path_areas.append(precision_recall(path, inst.truth).area())

        sweep_areas.append(_sweep_pr_curve(s_hat, sp_hat, grid, inst.truth, max_iter=5).area())

        t0 = time.perf_counter()
        for lam in grid:
            proximal_gradient_solve(s_hat, sp_hat, lam, accelerate=True, max_iter=10000, tol=1e-8)
        converged_time += time.perf_counter() - t0

    mean_knots = float(np.mean(knot_counts))
    mean_path_area = float(np.mean(path_areas))
    mean_sweep_area = float(np.mean(sweep_areas))
    ok = mean_knots >= 20 and mean_path_area >= mean_sweep_area and path_time < converged_time
    report(
        9,
        "path vs fixed-level sweeps",
        ok,
        f"(mean knots={mean_knots:.1f} >= 20; PR area path={mean_path_area:.3f} >= "
        f"5-iter sweep={mean_sweep_area:.3f}; path {path_time:.1f}s < converged sweep {converged_time:.1f}s)",
    )


def test_criterion_10_symmetry_and_support_recovery():
    asym_worst = 0.0
    recalls = []
    for seed in range(20):
        inst = synthetic_instance(30, k_changes=10, seed=10000 + seed)
        ss = np.random.SeedSequence(10100 + seed).spawn(2)
        coll_a = sample_collection(inst.sigma, 1, 5000, seed=ss[0])
        coll_b = sample_collection(inst.sigma_prime, 1, 5000, seed=ss[1])
        path = compute_path(estimate_correlation(coll_a), estimate_correlation(coll_b), c=100)
        for knot in path.knots:
            dense = knot.delta.toarray()
            asym_worst = max(asym_worst, float(np.abs(dense - dense.T).max()))
        budget_knot = None
        for knot in path.knots:
            if len(knot.active) <= 40:
                budget_knot = knot
        selected = budget_knot.delta.support_pairs()
        recalls.append(len(selected & set(inst.truth)) / len(inst.truth))
    mean_recall = float(np.mean(recalls))
    ok = asym_worst <= 1e-10 and mean_recall >= 0.6
    report(
        10,
        "symmetry and support",
        ok,
        f"(max asymmetry {asym_worst:.2e} <= 1e-10; mean recall at 40-entry budget "
        f"{mean_recall:.2f} >= 0.6)",
    )
