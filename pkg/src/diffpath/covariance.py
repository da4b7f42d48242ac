"""Correlation estimation from heterogeneous rank data.

Pipeline: per-dataset Kendall's tau, sample-size-weighted averaging across
datasets, the sine map from tau to Pearson correlation, and projection onto
the PSD cone with unit diagonal. Every step is a pure function of its
inputs; tau depends only on the order structure of the columns, so any
strictly increasing per-column transform of a dataset leaves it bit-identical.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is a hard dep, but degrade gracefully
    _njit = None

from .exceptions import DimensionMismatch, InsufficientSamples
from .validation import check_symmetric

__all__ = [
    "Dataset",
    "DatasetCollection",
    "TiesWarning",
    "kendall_tau",
    "kendall_tau_brute",
    "tau_matrix",
    "weighted_tau",
    "tau_to_correlation",
    "project_psd",
    "estimate_correlation",
]

# Fraction of tied pairs above which a data-quality warning is emitted.
_TIE_WARN_FRACTION = 0.01
# Sub-arrays at or below this size are counted by direct pairwise comparison.
_BRUTE_CUTOFF = 128


class TiesWarning(UserWarning):
    """More tied sample pairs than a continuous model should produce."""


@dataclass(frozen=True)
class Dataset:
    """One sample matrix (m_s x d) from a single source."""

    samples: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=float)
        if a.ndim != 2:
            raise ValueError("samples must be a 2-d array (rows = observations)")
        if a.shape[0] < 2:
            raise InsufficientSamples(f"dataset needs >= 2 samples, got {a.shape[0]}")
        if not np.all(np.isfinite(a)):
            raise ValueError("samples contain non-finite entries")
        object.__setattr__(self, "samples", a)

    @property
    def m(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class DatasetCollection:
    """Datasets sharing one latent correlation structure (common d)."""

    datasets: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ds = tuple(self.datasets)
        if not ds:
            raise ValueError("collection must contain at least one dataset")
        d = ds[0].dim
        for x in ds[1:]:
            if x.dim != d:
                raise DimensionMismatch(
                    f"datasets disagree on dimension: {x.dim} vs {d}"
                )
        object.__setattr__(self, "datasets", ds)

    @property
    def dim(self):
        return self.datasets[0].dim

    @property
    def total_m(self):
        return sum(x.m for x in self.datasets)

    def __iter__(self):
        return iter(self.datasets)

    def __len__(self):
        return len(self.datasets)


def _count_inversions_numpy(a):
    """Strict inversions (i < j with a[i] > a[j]); returns (count, sorted a)."""
    n = a.size
    if n <= _BRUTE_CUTOFF:
        count = int(np.count_nonzero(np.triu(a[:, None] > a[None, :], k=1)))
        return count, np.sort(a)
    mid = n // 2
    left_count, left = _count_inversions_numpy(a[:mid])
    right_count, right = _count_inversions_numpy(a[mid:])
    # cross pairs: elements of the left half strictly above each right element
    below = np.searchsorted(left, right, side="right")
    cross = left.size * right.size - int(below.sum())
    return left_count + right_count + cross, np.sort(np.concatenate((left, right)))


def _merge_count_python(a):
    return _count_inversions_numpy(a)[0]


if _njit is not None:

    @_njit(cache=True)
    def _merge_count(a):  # pragma: no cover - numerically identical to the fallback
        n = a.size
        src = a.copy()
        dst = np.empty_like(src)
        count = 0
        width = 1
        while width < n:
            for lo in range(0, n, 2 * width):
                mid = min(lo + width, n)
                hi = min(lo + 2 * width, n)
                i, j, k = lo, mid, lo
                while i < mid and j < hi:
                    if src[j] < src[i]:
                        # strictly below every remaining left element
                        count += mid - i
                        dst[k] = src[j]
                        j += 1
                    else:
                        dst[k] = src[i]
                        i += 1
                    k += 1
                while i < mid:
                    dst[k] = src[i]
                    i += 1
                    k += 1
                while j < hi:
                    dst[k] = src[j]
                    j += 1
                    k += 1
            src, dst = dst, src
            width *= 2
        return count

else:  # pragma: no cover
    _merge_count = _merge_count_python


def _tied_pairs(sorted_values):
    """Number of pairs falling in equal-value runs of a sorted array."""
    n = sorted_values.size
    if n < 2:
        return 0
    boundaries = np.flatnonzero(sorted_values[1:] != sorted_values[:-1])
    runs = np.diff(np.concatenate(([0], boundaries + 1, [n])))
    return int((runs * (runs - 1) // 2).sum())


def _pair_counts(x, y):
    """Concordant-minus-discordant count and tied-pair count for one pair."""
    m = x.size
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = m * (m - 1) // 2
    ties_x = _tied_pairs(xs)
    ties_y = _tied_pairs(np.sort(y))
    # joint runs: both coordinates constant
    same = (xs[1:] == xs[:-1]) & (ys[1:] == ys[:-1])
    boundaries = np.flatnonzero(~same)
    runs = np.diff(np.concatenate(([0], boundaries + 1, [m])))
    ties_xy = int((runs * (runs - 1) // 2).sum())
    # within tied-x runs ys is sorted ascending, so inversions in ys are
    # exactly the discordant pairs
    discordant = int(_merge_count(ys))
    net = n0 - ties_x - ties_y + ties_xy - 2 * discordant
    tied = ties_x + ties_y - ties_xy
    return net, tied


def kendall_tau(x, y):
    """Kendall's tau of two length-m vectors, tied pairs contributing 0.

    ``2 / (m (m-1)) * sum_{i<j} sign((x_i - x_j)(y_i - y_j))``, computed in
    O(m log m) by inversion counting on the lexicographically sorted pairs.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DimensionMismatch(f"vector lengths differ: {x.size} vs {y.size}")
    m = x.size
    if m < 2:
        raise InsufficientSamples(f"kendall_tau needs m >= 2, got {m}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs contain non-finite entries")
    net, tied = _pair_counts(x, y)
    n0 = m * (m - 1) // 2
    if tied > _TIE_WARN_FRACTION * n0:
        warnings.warn(
            f"{tied} of {n0} sample pairs are tied ({tied / n0:.1%}); "
            "tau assumes continuous data",
            TiesWarning,
            stacklevel=2,
        )
    return 2.0 * net / (m * (m - 1))


def kendall_tau_brute(x, y):
    """O(m²) pair-enumeration definition; the oracle for `kendall_tau`."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    m = x.size
    if m < 2:
        raise InsufficientSamples(f"kendall_tau needs m >= 2, got {m}")
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    net = int(np.triu(dx * dy, k=1).sum())
    return 2.0 * net / (m * (m - 1))


def tau_matrix(ds):
    """Pairwise tau between columns of a dataset; unit diagonal."""
    x = ds.samples
    d = x.shape[1]
    t = np.eye(d)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", append=False)
        for k in range(d):
            for l in range(k + 1, d):
                t[k, l] = t[l, k] = kendall_tau(x[:, k], x[:, l])
    flagged = 0
    for w in caught:
        if issubclass(w.category, TiesWarning):
            flagged += 1
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if flagged:
        warnings.warn(
            f"{flagged} of {d * (d - 1) // 2} column pairs exceed "
            f"{_TIE_WARN_FRACTION:.0%} tied sample pairs",
            TiesWarning,
            stacklevel=2,
        )
    return t


def weighted_tau(coll):
    """Convex combination of per-dataset tau matrices, weighted by m_s / m."""
    total = coll.total_m
    out = np.zeros((coll.dim, coll.dim))
    for ds in coll:
        out += (ds.m / total) * tau_matrix(ds)
    return out


def tau_to_correlation(tau):
    """Map tau to Pearson scale: sin(pi/2 * tau) off the diagonal, 1 on it.

    PSD is not guaranteed; feed the result through `project_psd`.
    """
    t = np.asarray(tau, dtype=float)
    out = np.sin(0.5 * np.pi * t)
    np.fill_diagonal(out, 1.0)
    return out


def project_psd(sigma_tilde, mu=0.0):
    """Project a symmetric unit-diagonal matrix onto the PSD cone.

    Eigenvalues are clipped at ``max(mu/2, 1e-8)``, the matrix reassembled,
    then rescaled to restore the unit diagonal (which preserves PSD). An
    already-PSD input is returned unchanged up to symmetrization. `mu` only
    sets the clip floor.
    """
    a = check_symmetric(sigma_tilde, name="sigma_tilde")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    w, vecs = np.linalg.eigh(a)
    if w[0] >= -1e-12:
        return a
    floor = max(0.5 * mu, 1e-8)
    rebuilt = (vecs * np.maximum(w, floor)) @ vecs.T
    scale = np.sqrt(np.diag(rebuilt))
    out = rebuilt / np.outer(scale, scale)
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out


def estimate_correlation(coll, mu=0.0):
    """Weighted tau -> sine map -> PSD projection, for one collection.

    The pre-projection matrix is available separately as
    ``tau_to_correlation(weighted_tau(coll))``.
    """
    return project_psd(tau_to_correlation(weighted_tau(coll)), mu=mu)
