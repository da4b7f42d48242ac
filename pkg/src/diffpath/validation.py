"""Input validation helpers for matrix-valued arguments."""

import numpy as np

from .exceptions import DimensionMismatch, NotPSD, NotSymmetric

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-6


def as_square_matrix(m, name="matrix"):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_symmetric(m, tol=SYMMETRY_TOL, name="matrix"):
    """Return the symmetrized matrix; raise NotSymmetric beyond `tol`."""
    a = as_square_matrix(m, name)
    dev = np.abs(a - a.T).max() if a.size else 0.0
    if dev > tol:
        raise NotSymmetric(f"{name} deviates from symmetry by {dev:.3g} (tol {tol:.3g})")
    return 0.5 * (a + a.T)


def check_correlation(m, psd_tol=PSD_TOL, name="correlation matrix"):
    """Validate a symmetric unit-diagonal PSD matrix and return a clean copy.

    PSD is checked up to `psd_tol` on the smallest eigenvalue; pass
    ``psd_tol=None`` to skip the (eigenvalue) check.
    """
    a = check_symmetric(m, name=name)
    if a.shape[0] == 0:
        raise ValueError(f"{name} must be non-empty")
    if np.abs(np.diag(a) - 1.0).max() > 1e-8:
        raise ValueError(f"{name} must have unit diagonal")
    if np.abs(a).max() > 1.0 + 1e-8:
        raise ValueError(f"{name} has entries outside [-1, 1]")
    if psd_tol is not None:
        smallest = np.linalg.eigvalsh(a)[0]
        if smallest < -psd_tol:
            raise NotPSD(f"{name} has eigenvalue {smallest:.3g} < -{psd_tol:.3g}")
    return a


def check_same_dim(a, b, name_a="first matrix", name_b="second matrix"):
    if a.shape != b.shape:
        raise DimensionMismatch(
            f"{name_a} has shape {a.shape} but {name_b} has shape {b.shape}"
        )
