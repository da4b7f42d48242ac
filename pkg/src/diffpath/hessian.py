"""Implicit Kronecker-structured Hessian of the difference loss.

The quadratic part of the loss has Hessian ``0.5 * (S ⊗ S' + S' ⊗ S)`` with
respect to the column-stacked matrix variable. The operator below never
materializes that d² x d² matrix: entries, columns and weighted column sums
come from rank-structured outer products of columns of S and S', so memory
stays O(d²) and a column costs O(d²).

Vec indexing is column-major throughout: entry (i, j) of a d x d matrix sits
at vec position ``i + d*j``.
"""

import numpy as np

from .exceptions import SingularActiveSet
from .validation import check_same_dim, check_symmetric

# Schur pivots smaller than this (relative to the diagonal scale) make the
# extended block numerically singular.
SCHUR_TOL = 1e-10
# Condition estimates above this are treated as singular by callers.
CONDITION_LIMIT = 1e12
# Full re-solve of the maintained inverse after this many block updates.
_REFRESH_EVERY = 32


def vec_index(i, j, d):
    """Column-major vec position of matrix entry (i, j)."""
    return int(i) + d * int(j)


def vec_pair(e, d):
    """Matrix entry (i, j) of column-major vec position `e`."""
    e = int(e)
    if not 0 <= e < d * d:
        raise IndexError(f"vec index {e} out of range for dimension {d}")
    return e % d, e // d


def exchange_index(e, d):
    """Vec position of the transposed entry: (i, j) -> (j, i)."""
    i, j = vec_pair(e, d)
    return vec_index(j, i, d)


class DTraceHessian:
    """Implicit ``0.5 * (S ⊗ S' + S' ⊗ S)`` acting on vec-indexed entries.

    Immutable; safe to share across threads.
    """

    def __init__(self, sigma, sigma_prime):
        s = check_symmetric(sigma, name="sigma")
        sp = check_symmetric(sigma_prime, name="sigma_prime")
        check_same_dim(s, sp, "sigma", "sigma_prime")
        self.sigma = s
        self.sigma_prime = sp
        self.dim = s.shape[0]

    @property
    def size(self):
        return self.dim * self.dim

    def entry(self, e, f):
        """Entry at vec positions (e, f)."""
        d = self.dim
        i, j = vec_pair(e, d)
        k, l = vec_pair(f, d)
        s, sp = self.sigma, self.sigma_prime
        return 0.5 * (s[i, k] * sp[j, l] + sp[i, k] * s[j, l])

    def column(self, e):
        """Full column at vec position `e`, as a length-d² vector (O(d²))."""
        d = self.dim
        i, j = vec_pair(e, d)
        s, sp = self.sigma, self.sigma_prime
        m = 0.5 * (np.outer(s[:, i], sp[:, j]) + np.outer(sp[:, i], s[:, j]))
        return m.ravel(order="F")

    def submatrix(self, active):
        """Dense block over the vec positions in `active` (order preserved)."""
        if len(active) == 0:
            return np.zeros((0, 0))
        d = self.dim
        idx = np.asarray(active, dtype=int)
        rows, cols = idx % d, idx // d
        s, sp = self.sigma, self.sigma_prime
        srr = s[np.ix_(rows, rows)]
        spcc = sp[np.ix_(cols, cols)]
        sprr = sp[np.ix_(rows, rows)]
        scc = s[np.ix_(cols, cols)]
        return 0.5 * (srr * spcc + sprr * scc)

    def column_block(self, active, e):
        """Restriction of column `e` to the vec positions in `active`."""
        d = self.dim
        idx = np.asarray(active, dtype=int)
        rows, cols = idx % d, idx // d
        i, j = vec_pair(e, d)
        s, sp = self.sigma, self.sigma_prime
        return 0.5 * (s[rows, i] * sp[cols, j] + sp[rows, i] * s[cols, j])

    def weighted_column_sum(self, active, weights):
        """``H[:, active] @ weights`` as a length-d² vector in O(|A| d²)."""
        d = self.dim
        if len(active) == 0:
            return np.zeros(d * d)
        idx = np.asarray(active, dtype=int)
        w = np.asarray(weights, dtype=float)
        rows, cols = idx % d, idx // d
        s, sp = self.sigma, self.sigma_prime
        # sum_a w_a * 0.5 * (s[:,i_a] sp[:,j_a]^T + sp[:,i_a] s[:,j_a]^T)
        g = 0.5 * ((s[:, rows] * w) @ sp[:, cols].T + (sp[:, rows] * w) @ s[:, cols].T)
        return g.ravel(order="F")

    def apply_to_matrix(self, delta):
        """``0.5 * (S @ delta @ S' + S' @ delta @ S)`` for a dense d x d input."""
        s, sp = self.sigma, self.sigma_prime
        return 0.5 * (s @ delta @ sp + sp @ delta @ s)


class ActiveBlockInverse:
    """Exact inverse of the Hessian block over an ordered active set.

    Maintained incrementally: O(|A|²) per extend (Schur-complement border
    update) or shrink (partitioned-inverse downdate), with a periodic full
    re-solve to keep rounding in check. The block itself is stored so the
    inverse can always be validated or refreshed against it.

    Single-owner mutable-ish state: methods return new instances and never
    alias the caller's arrays into mutated buffers.
    """

    def __init__(self, active=(), block=None, inv=None, updates=0):
        self.active = tuple(int(e) for e in active)
        k = len(self.active)
        self.block = np.zeros((0, 0)) if block is None else block
        self.inv = np.zeros((0, 0)) if inv is None else inv
        if self.block.shape != (k, k) or self.inv.shape != (k, k):
            raise ValueError("block/inverse shapes do not match the active set")
        self._updates = updates
        self.condition_estimate = self._estimate_condition()

    def __len__(self):
        return len(self.active)

    def _estimate_condition(self):
        if len(self.active) == 0:
            return 1.0
        n1 = np.abs(self.block).sum(axis=0).max()
        n2 = np.abs(self.inv).sum(axis=0).max()
        return float(n1 * n2)

    def extend(self, op, e):
        """Return a new inverse with vec index `e` appended to the active set.

        Raises SingularActiveSet when the Schur complement of the new row
        vanishes relative to the diagonal scale.
        """
        e = int(e)
        if e in self.active:
            raise ValueError(f"vec index {e} is already active")
        b = op.column_block(self.active, e)
        c = op.entry(e, e)
        k = len(self.active)
        if k == 0:
            if abs(c) <= SCHUR_TOL:
                raise SingularActiveSet(e)
            block = np.array([[c]])
            return ActiveBlockInverse((e,), block, np.array([[1.0 / c]]), self._updates + 1)
        u = self.inv @ b
        schur = c - b @ u
        if abs(schur) <= SCHUR_TOL * max(1.0, abs(c)):
            raise SingularActiveSet(e)
        inv = np.empty((k + 1, k + 1))
        inv[:k, :k] = self.inv + np.outer(u, u) / schur
        inv[:k, k] = -u / schur
        inv[k, :k] = -u / schur
        inv[k, k] = 1.0 / schur
        block = np.empty((k + 1, k + 1))
        block[:k, :k] = self.block
        block[:k, k] = b
        block[k, :k] = b
        block[k, k] = c
        out = ActiveBlockInverse(self.active + (e,), block, inv, self._updates + 1)
        return out._maybe_refresh()

    def shrink(self, e):
        """Return a new inverse with vec index `e` removed from the active set."""
        e = int(e)
        if e not in self.active:
            raise ValueError(f"vec index {e} is not active")
        p = self.active.index(e)
        keep = [q for q in range(len(self.active)) if q != p]
        if not keep:
            return ActiveBlockInverse()
        g = self.inv[p, p]
        block = self.block[np.ix_(keep, keep)].copy()
        if abs(g) <= SCHUR_TOL:
            # Degenerate pivot; fall back to a direct solve of the reduced block.
            inv = np.linalg.solve(block, np.eye(len(keep)))
        else:
            f = self.inv[keep, p]
            inv = self.inv[np.ix_(keep, keep)] - np.outer(f, f) / g
        active = tuple(self.active[q] for q in keep)
        out = ActiveBlockInverse(active, block, inv, self._updates + 1)
        return out._maybe_refresh()

    def _maybe_refresh(self):
        if self._updates % _REFRESH_EVERY:
            return self
        return self.refresh()

    def refresh(self):
        """Re-solve the inverse from the stored block."""
        if len(self.active) == 0:
            return self
        try:
            inv = np.linalg.solve(self.block, np.eye(len(self.active)))
        except np.linalg.LinAlgError:
            raise SingularActiveSet(self.active[-1]) from None
        return ActiveBlockInverse(self.active, self.block.copy(), inv, self._updates)

    def solve(self, rhs):
        """Direct LAPACK solve against the stored block (knot-grade accuracy)."""
        if len(self.active) == 0:
            return np.zeros(0)
        return np.linalg.solve(self.block, np.asarray(rhs, dtype=float))

    def apply(self, rhs):
        """Multiply by the maintained inverse (scan-grade accuracy, O(|A|²))."""
        if len(self.active) == 0:
            return np.zeros(0)
        return self.inv @ np.asarray(rhs, dtype=float)
