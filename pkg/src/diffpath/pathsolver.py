"""Exact piecewise-linear solution path of the penalized difference loss.

The estimator solves ``min 0.25 (<S D, D S'> + <S' D, D S>) - <D, S - S'>
+ lam * ||D||_1`` for every penalty level at once. Between consecutive knots
the active set and signs are fixed and the solution is linear in ``lam``:

    vec(D)(lam) restricted to A  =  -(H_AA)^{-1} (v_A + lam * s_A)

with H the implicit Kronecker-average Hessian and ``v = vec(S' - S)``. The
orientation of v is forced by the optimality conditions: the gradient of the
smooth loss at D = 0 is S' - S, so the first active coordinate is the largest
entry of |S - S'| and enters with sign -sign(v). Knots are where a coordinate
hits the constraint boundary (enters) or its trajectory crosses zero (leaves).

Knots store the active set of the segment *above* them; their solution values
are computed at the knot itself, so the first knot's solution is exactly zero
and every entering/leaving coordinate is zero at its knot.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import OutOfRange, SingularActiveSet
from .hessian import (
    CONDITION_LIMIT,
    ActiveBlockInverse,
    DTraceHessian,
    exchange_index,
)
from .validation import check_correlation, check_same_dim

__all__ = [
    "SparseDelta",
    "PathEvent",
    "Knot",
    "SolutionPath",
    "PathState",
    "HitEvent",
    "CrossEvent",
    "KKTReport",
    "compute_path",
    "hitting_event",
    "crossing_event",
    "interpolate",
    "kkt_check",
]

# A candidate knot must sit strictly below the current one by this margin.
_STRICT_TOL = 1e-12
# Denominators below this are trajectories parallel to lambda: no candidate.
_DENOM_TOL = 1e-12
# Candidates within this (relative) distance of the best tie together;
# transpose partners tie exactly in exact arithmetic.
_TIE_TOL = 1e-9
# Solution entries this small relative to the largest are snapped to zero
# (entering/leaving coordinates are exactly zero at the knot).
_SNAP_TOL = 1e-12


@dataclass(frozen=True)
class SparseDelta:
    """d x d matrix with values on an explicit set of vec positions."""

    dim: int
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def zeros(cls, dim):
        return cls(dim, np.zeros(0, dtype=int), np.zeros(0))

    @property
    def nnz(self):
        return int(np.count_nonzero(self.values))

    def toarray(self):
        out = np.zeros((self.dim, self.dim))
        if self.indices.size:
            out[self.indices % self.dim, self.indices // self.dim] = self.values
        return out

    def entries(self):
        """Yield (i, j, value) for stored nonzero entries."""
        d = self.dim
        for e, val in zip(self.indices, self.values):
            if val != 0.0:
                yield int(e) % d, int(e) // d, float(val)

    def support_pairs(self):
        """Upper-triangle (i < j) pairs carrying a nonzero value."""
        pairs = set()
        for i, j, _ in self.entries():
            if i != j:
                pairs.add((min(i, j), max(i, j)))
        return pairs


@dataclass(frozen=True)
class PathEvent:
    kind: str  # "hit" | "cross" | "terminal"
    indices: tuple = ()
    sign: int = 0
    reason: str = ""


@dataclass(frozen=True)
class HitEvent:
    lam: float
    indices: tuple
    sign: int


@dataclass(frozen=True)
class CrossEvent:
    lam: float
    indices: tuple


@dataclass(frozen=True)
class Knot:
    lam: float
    active: tuple  # active set of the segment above this knot
    signs: np.ndarray
    values: np.ndarray  # solution at `lam`, aligned with `active`
    event: PathEvent
    dim: int

    @property
    def delta(self):
        return SparseDelta(self.dim, np.asarray(self.active, dtype=int), self.values)


@dataclass(frozen=True)
class SolutionPath:
    dim: int
    knots: list
    budget_c: int
    lambda_min: float
    termination_reason: str

    @property
    def lambda_max(self):
        return self.knots[0].lam

    @property
    def lambda_last(self):
        return self.knots[-1].lam

    def interpolate(self, lam):
        return interpolate(self, lam)


@dataclass(frozen=True)
class PathState:
    """Solver state between knots; inputs to the event scans."""

    t: int
    lam: float
    active: tuple
    signs: np.ndarray
    inverse: ActiveBlockInverse
    v: np.ndarray
    op: DTraceHessian


def _strict_limit(lam):
    if math.isinf(lam):
        return np.inf
    return lam - _STRICT_TOL * max(1.0, abs(lam))


def _tie_indices(candidates, positions_to_vec=None):
    """Vec indices tied with the best candidate; smallest first."""
    best = candidates.max()
    tol = _TIE_TOL * max(1.0, abs(best))
    tied = np.flatnonzero(candidates >= best - tol)
    if positions_to_vec is not None:
        tied = np.asarray([positions_to_vec[p] for p in tied], dtype=int)
    return np.sort(tied)


def hitting_event(state):
    """Largest penalty level strictly below the current knot at which an
    inactive coordinate reaches the constraint boundary.

    Returns None when no coordinate has a candidate below the current knot.
    The entering sign maximizes the candidate; the transpose partner is
    admitted in the same event when it ties (symmetric inputs make the pair's
    candidates identical).
    """
    op, ai, v = state.op, state.inverse, state.v
    active = list(state.active)
    d = op.dim
    if active:
        w_v = ai.apply(v[active])
        w_s = ai.apply(state.signs)
        g_v = op.weighted_column_sum(active, w_v)
        g_s = op.weighted_column_sum(active, w_s)
    else:
        g_v = np.zeros(d * d)
        g_s = np.zeros(d * d)
    num = g_v - v
    limit = _strict_limit(state.lam)
    cands = np.full(d * d, -np.inf)
    sgns = np.zeros(d * d, dtype=int)
    # the max runs over valid (coordinate, sign) pairs: filter before the
    # per-coordinate sign collapse, or an invalid sign shadows a valid one
    for s in (1, -1):
        den = s - g_s
        usable = np.abs(den) > _DENOM_TOL
        c = np.where(usable, num / np.where(usable, den, 1.0), -np.inf)
        c[~np.isfinite(c)] = -np.inf
        # events live in (0, lam): a non-positive root means the boundary is
        # never reached on the remaining range
        c[(c >= limit) | (c <= 0.0)] = -np.inf
        better = c > cands
        cands[better] = c[better]
        sgns[better] = s
    if active:
        cands[active] = -np.inf
    if cands.max() == -np.inf:
        return None
    tied = _tie_indices(cands)
    e = int(tied[0])
    indices = [e]
    partner = exchange_index(e, d)
    if partner != e and partner in set(int(q) for q in tied):
        indices.append(partner)
    return HitEvent(float(cands[e]), tuple(indices), int(sgns[e]))


def crossing_event(state):
    """Largest penalty level strictly below the current knot at which an
    active coordinate's linear trajectory returns to zero.

    Returns None for an empty active set or when every trajectory is either
    parallel to the penalty axis or crosses above the current knot.
    """
    active = list(state.active)
    if not active:
        return None
    ai, v = state.inverse, state.v
    w_v = ai.apply(v[active])
    w_s = ai.apply(state.signs)
    usable = np.abs(w_s) > _DENOM_TOL
    cands = np.where(usable, -w_v / np.where(usable, w_s, 1.0), -np.inf)
    cands[~np.isfinite(cands)] = -np.inf
    # a non-positive root means the trajectory never returns to zero here
    cands[(cands >= _strict_limit(state.lam)) | (cands <= 0.0)] = -np.inf
    if cands.max() == -np.inf:
        return None
    tied = _tie_indices(cands, positions_to_vec=active)
    e = int(tied[0])
    indices = [e]
    partner = exchange_index(e, state.op.dim)
    if partner != e and partner in set(int(q) for q in tied):
        indices.append(partner)
    pos = active.index(e)
    return CrossEvent(float(cands[pos]), tuple(indices))


def _pick_event(hit, cross):
    # Ties resolve in favor of the hit (keeps the active set maximal).
    if hit is None:
        return cross
    if cross is None:
        return hit
    if hit.lam >= cross.lam - _STRICT_TOL * max(1.0, abs(cross.lam)):
        return hit
    return cross


def _solve_values(ai, active, signs, v, lam):
    if not active:
        return np.zeros(0)
    rhs = v[list(active)] + lam * signs
    vals = -ai.solve(rhs)
    scale = max(1.0, float(np.abs(vals).max()))
    vals[np.abs(vals) <= _SNAP_TOL * scale] = 0.0
    return vals


def _knot(dim, lam, active, signs, values, event):
    return Knot(
        lam=float(lam),
        active=tuple(active),
        signs=np.asarray(signs, dtype=float).copy(),
        values=values,
        event=event,
        dim=dim,
    )


def compute_path(sigma, sigma_prime, c=100, lambda_min=0.0):
    """Trace every knot of the solution path from ``max |S - S'|`` downward.

    Stops when the next event would push the active set past `c` entries,
    when the active Hessian block turns singular (or its condition estimate
    exceeds 1e12), or when the next knot falls at or below `lambda_min`; in
    each case a terminal knot closes the last segment and the reason is
    recorded on the returned path.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if lambda_min < 0:
        raise ValueError("lambda_min must be >= 0")
    s = check_correlation(sigma, name="sigma")
    sp = check_correlation(sigma_prime, name="sigma_prime")
    check_same_dim(s, sp, "sigma", "sigma_prime")
    d = s.shape[0]
    v = (sp - s).ravel(order="F")
    op = DTraceHessian(s, sp)

    ai = ActiveBlockInverse()
    active = []
    signs = np.zeros(0)
    knots = []
    lam = np.inf
    reason = None

    while True:
        state = PathState(
            t=len(knots),
            lam=lam,
            active=tuple(active),
            signs=signs,
            inverse=ai,
            v=v,
            op=op,
        )
        event = _pick_event(hitting_event(state), crossing_event(state))

        if event is None or event.lam <= lambda_min:
            reason = "lambda_min_reached" if event is not None else "no_further_events"
            vals = _solve_values(ai, active, signs, v, lambda_min)
            knots.append(
                _knot(d, lambda_min, active, signs, vals, PathEvent("terminal", reason=reason))
            )
            break

        vals = _solve_values(ai, active, signs, v, event.lam)

        if isinstance(event, HitEvent):
            if len(active) + len(event.indices) > c:
                reason = "active_set_budget"
                knots.append(
                    _knot(
                        d,
                        event.lam,
                        active,
                        signs,
                        vals,
                        PathEvent("terminal", event.indices, event.sign, reason),
                    )
                )
                break
            try:
                extended = ai
                for e in event.indices:
                    extended = extended.extend(op, e)
            except SingularActiveSet:
                reason = "singular_active_block"
                knots.append(
                    _knot(
                        d,
                        event.lam,
                        active,
                        signs,
                        vals,
                        PathEvent("terminal", event.indices, event.sign, reason),
                    )
                )
                break
            if extended.condition_estimate > CONDITION_LIMIT:
                reason = "singular_active_block"
                knots.append(
                    _knot(
                        d,
                        event.lam,
                        active,
                        signs,
                        vals,
                        PathEvent("terminal", event.indices, event.sign, reason),
                    )
                )
                break
            knots.append(
                _knot(d, event.lam, active, signs, vals, PathEvent("hit", event.indices, event.sign))
            )
            active.extend(event.indices)
            signs = np.concatenate([signs, [float(event.sign)] * len(event.indices)])
            ai = extended
        else:
            knots.append(_knot(d, event.lam, active, signs, vals, PathEvent("cross", event.indices)))
            for e in event.indices:
                p = active.index(e)
                active.pop(p)
                signs = np.delete(signs, p)
                ai = ai.shrink(e)
        lam = event.lam

    return SolutionPath(
        dim=d,
        knots=knots,
        budget_c=c,
        lambda_min=lambda_min,
        termination_reason=reason,
    )


def interpolate(path, lam):
    """Solution at any covered penalty level, by knot interpolation.

    Above the first knot the solution is identically zero; below the last
    knot the path is not defined and OutOfRange (carrying the last covered
    level) is raised. At a knot the stored solution is returned as is.
    """
    lam = float(lam)
    knots = path.knots
    if lam > knots[0].lam:
        return SparseDelta.zeros(path.dim)
    if lam < knots[-1].lam:
        raise OutOfRange(lam, knots[-1].lam)
    lams = np.array([k.lam for k in knots])
    pos = int(np.searchsorted(-lams, -lam, side="left"))
    if lams[pos] == lam:
        return knots[pos].delta
    lower, upper = knots[pos], knots[pos - 1]
    theta = (upper.lam - lam) / (upper.lam - lower.lam)
    upper_vals = dict(zip(upper.active, upper.values))
    vals = theta * lower.values + (1.0 - theta) * np.array(
        [upper_vals.get(e, 0.0) for e in lower.active]
    )
    return SparseDelta(path.dim, np.asarray(lower.active, dtype=int), vals)


@dataclass(frozen=True)
class KKTReport:
    max_stationarity_residual: float
    max_dual_violation: float
    ok: bool


def kkt_check(delta, lam, sigma, sigma_prime, tol=1e-8):
    """Verify the optimality conditions of a candidate solution at `lam`.

    Uses full Hessian rows (dense matrix products), independently of the
    active-block machinery that produced the path: on the support the
    gradient must equal -lam * sign(delta) within `tol`; off it the gradient
    magnitude may exceed lam by at most `tol`.
    """
    if lam <= 0:
        raise ValueError("kkt_check requires lam > 0")
    dense = delta.toarray() if isinstance(delta, SparseDelta) else np.asarray(delta, dtype=float)
    s = np.asarray(sigma, dtype=float)
    sp = np.asarray(sigma_prime, dtype=float)
    grad = 0.5 * (s @ dense @ sp + sp @ dense @ s) + (sp - s)
    on = dense != 0
    stationarity = float(np.abs(grad + lam * np.sign(dense))[on].max()) if on.any() else 0.0
    off = ~on
    dual = float(max(0.0, np.abs(grad)[off].max() - lam)) if off.any() else 0.0
    return KKTReport(
        max_stationarity_residual=stationarity,
        max_dual_violation=dual,
        ok=(stationarity <= tol and dual <= tol),
    )
