import warnings

import numpy as np
import pytest
from conftest import random_correlation

from diffpath.covariance import (
    Dataset,
    DatasetCollection,
    TiesWarning,
    estimate_correlation,
    kendall_tau,
    kendall_tau_brute,
    project_psd,
    tau_matrix,
    tau_to_correlation,
    weighted_tau,
)
from diffpath.datagen import apply_transforms, random_transform_set, sample_npn
from diffpath.exceptions import DimensionMismatch, InsufficientSamples, NotSymmetric


def test_tau_perfect_concordance_and_discordance():
    assert kendall_tau([1, 2, 3], [10, 20, 30]) == 1.0
    assert kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0


def test_tau_requires_two_samples():
    with pytest.raises(InsufficientSamples):
        kendall_tau([1.0], [2.0])
    with pytest.raises(DimensionMismatch):
        kendall_tau([1.0, 2.0], [1.0, 2.0, 3.0])


def test_tau_matches_brute_force_exactly():
    rng = np.random.default_rng(0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiesWarning)
        for trial in range(60):
            m = int(rng.integers(2, 40))
            if trial % 2:
                x = rng.standard_normal(m)
                y = rng.standard_normal(m)
            else:  # heavy ties
                x = rng.integers(0, 4, size=m).astype(float)
                y = rng.integers(0, 4, size=m).astype(float)
            assert kendall_tau(x, y) == kendall_tau_brute(x, y)


def test_tau_large_input_against_brute():
    rng = np.random.default_rng(3)
    x, y = rng.standard_normal(500), rng.standard_normal(500)
    assert kendall_tau(x, y) == kendall_tau_brute(x, y)


def test_ties_warning_over_one_percent():
    x = np.repeat([1.0, 2.0, 3.0], 10)
    y = np.arange(30, dtype=float)
    with pytest.warns(TiesWarning):
        kendall_tau(x, y)


def test_tau_matrix_trivial_cases():
    rng = np.random.default_rng(1)
    one = Dataset(rng.standard_normal((8, 1)))
    assert np.array_equal(tau_matrix(one), np.array([[1.0]]))
    col = rng.standard_normal(10)
    dup = Dataset(np.column_stack([col, 2 * col + 5]))
    assert tau_matrix(dup)[0, 1] == 1.0


def test_tau_matrix_matches_pairwise_brute():
    rng = np.random.default_rng(2)
    ds = Dataset(rng.standard_normal((6, 3)))
    t = tau_matrix(ds)
    for k in range(3):
        for l in range(3):
            expected = 1.0 if k == l else kendall_tau_brute(ds.samples[:, k], ds.samples[:, l])
            assert t[k, l] == expected


def _permutation_with_inversions(m, k):
    # Lehmer code: digit i may contribute up to m-1-i inversions
    digits = []
    remaining = k
    for i in range(m):
        cap = m - 1 - i
        take = min(cap, remaining)
        digits.append(take)
        remaining -= take
    assert remaining == 0
    pool = list(range(m))
    return [pool.pop(digit) for digit in digits]


def test_weighted_tau_is_weighted_average():
    # datasets sized 100 and 300 with exact taus 0 and 0.4 average to 0.3
    m1, m2 = 100, 300
    x1 = np.arange(m1, dtype=float)
    y1 = np.array(_permutation_with_inversions(m1, m1 * (m1 - 1) // 4), dtype=float)
    ds1 = Dataset(np.column_stack([x1, y1]))
    assert tau_matrix(ds1)[0, 1] == 0.0

    n0 = m2 * (m2 - 1) // 2
    k = int((n0 - 0.4 * n0) / 2)
    x2 = np.arange(m2, dtype=float)
    y2 = np.array(_permutation_with_inversions(m2, k), dtype=float)
    ds2 = Dataset(np.column_stack([x2, y2]))
    assert tau_matrix(ds2)[0, 1] == pytest.approx(0.4, abs=1e-15)

    combined = weighted_tau(DatasetCollection((ds1, ds2)))
    assert combined[0, 1] == pytest.approx(0.3, abs=1e-12)


def test_weighted_tau_fixed_points_and_convex_hull():
    rng = np.random.default_rng(4)
    ds = Dataset(rng.standard_normal((30, 4)))
    single = weighted_tau(DatasetCollection((ds,)))
    assert np.array_equal(single, tau_matrix(ds))
    twice = weighted_tau(DatasetCollection((ds, ds)))
    assert np.abs(twice - single).max() <= 1e-15

    other = Dataset(rng.standard_normal((50, 4)))
    coll = DatasetCollection((ds, other))
    mixed = weighted_tau(coll)
    lo = np.minimum(tau_matrix(ds), tau_matrix(other))
    hi = np.maximum(tau_matrix(ds), tau_matrix(other))
    assert np.all(mixed >= lo - 1e-12) and np.all(mixed <= hi + 1e-12)


def test_weighted_tau_dimension_mismatch():
    rng = np.random.default_rng(5)
    with pytest.raises(DimensionMismatch):
        DatasetCollection(
            (Dataset(rng.standard_normal((5, 2))), Dataset(rng.standard_normal((5, 3))))
        )


def test_tau_to_correlation_values():
    tau = np.array([[1.0, 0.0, 1 / 3], [0.0, 1.0, 1.0], [1 / 3, 1.0, 1.0]])
    out = tau_to_correlation(tau)
    assert out[0, 1] == 0.0
    assert out[1, 2] == 1.0
    assert out[0, 2] == pytest.approx(0.5, abs=1e-12)
    assert np.array_equal(np.diag(out), np.ones(3))


def test_project_psd_identity_and_idempotence():
    assert np.array_equal(project_psd(np.eye(4)), np.eye(4))
    rng = np.random.default_rng(6)
    c = random_correlation(5, rng)
    assert np.abs(project_psd(c) - c).max() <= 1e-10


def test_project_psd_two_by_two_example():
    out = project_psd(np.array([[1.0, 1.2], [1.2, 1.0]]))
    assert np.abs(out - np.ones((2, 2))).max() <= 1e-8
    assert np.linalg.eigvalsh(out)[0] >= -1e-8


def test_project_psd_output_invariants():
    rng = np.random.default_rng(7)
    for _ in range(10):
        tau = rng.uniform(-1, 1, size=(6, 6))
        tau = 0.5 * (tau + tau.T)
        np.fill_diagonal(tau, 1.0)
        sig = tau_to_correlation(tau)
        out = project_psd(sig, mu=1e-8)
        assert np.array_equal(np.diag(out), np.ones(6))
        assert np.linalg.eigvalsh(out)[0] >= -1e-8
        assert np.abs(out - out.T).max() == 0.0


def test_project_psd_rejects_asymmetric():
    bad = np.array([[1.0, 0.5], [0.2, 1.0]])
    with pytest.raises(NotSymmetric):
        project_psd(bad)


def test_estimate_correlation_independent_coordinates():
    rng = np.random.default_rng(8)
    coll = DatasetCollection((Dataset(rng.standard_normal((5000, 4))),))
    est = estimate_correlation(coll)
    off = est[~np.eye(4, dtype=bool)]
    assert np.abs(off).max() <= 0.1
    assert np.array_equal(np.diag(est), np.ones(4))


def test_estimate_correlation_transform_equivariance():
    # same latent draws through different strictly increasing transforms give
    # the identical estimate (rank statistics see only the order)
    rng = np.random.default_rng(9)
    sigma = random_correlation(3, rng)
    a = sample_npn(sigma, ("scale2",) * 3, 400, seed=10)
    b = sample_npn(sigma, ("cube",) * 3, 300, seed=11)
    a_flat = sample_npn(sigma, ("exp2",) * 3, 400, seed=10)
    b_flat = sample_npn(sigma, ("exp2",) * 3, 300, seed=11)
    het = estimate_correlation(DatasetCollection((a, b)))
    flat = estimate_correlation(DatasetCollection((a_flat, b_flat)))
    assert np.array_equal(het, flat)


def test_tau_matrix_monotone_transform_invariance():
    rng = np.random.default_rng(12)
    for trial in range(10):
        ds = Dataset(rng.standard_normal((40, 5)))
        tags = random_transform_set(5, seed=trial)
        transformed = Dataset(apply_transforms(ds.samples, tags))
        assert np.array_equal(tau_matrix(ds), tau_matrix(transformed))
