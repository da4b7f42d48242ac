"""Proximal-gradient solver at a fixed penalty level.

Slow but independent of the path machinery: iterates soft-thresholded
gradient steps on the dense matrix variable. Used as the correctness oracle
for the exact path and as the fixed-lambda baseline in benchmarks.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NotPSD
from .validation import check_same_dim, check_symmetric


@dataclass(frozen=True)
class SolveReport:
    delta: np.ndarray
    iterations: int
    final_objective: float
    stationarity_residual: float
    converged: bool


def loss_gradient(delta, sigma, sigma_prime):
    """Gradient of the smooth part: 0.5 (S D S' + S' D S) - S + S'."""
    return (
        0.5 * (sigma @ delta @ sigma_prime + sigma_prime @ delta @ sigma)
        - sigma
        + sigma_prime
    )


def objective_value(delta, sigma, sigma_prime, lam):
    """Quadratic difference loss plus the l1 penalty, evaluated exactly."""
    delta = np.asarray(delta, dtype=float)
    # <A, B> = tr(A B^T) = sum(A * B)
    quad = 0.25 * (
        np.sum((sigma @ delta) * (delta @ sigma_prime))
        + np.sum((sigma_prime @ delta) * (delta @ sigma))
    )
    linear = np.sum(delta * (sigma - sigma_prime))
    return quad - linear + lam * np.abs(delta).sum()


def stationarity_residual(delta, sigma, sigma_prime, lam):
    """Max KKT violation: subgradient mismatch on the support, excess of the
    dual bound off it."""
    r = loss_gradient(delta, sigma, sigma_prime)
    on = delta != 0
    stat = np.abs(r + lam * np.sign(delta))[on].max() if on.any() else 0.0
    off = ~on
    dual = max(0.0, (np.abs(r)[off].max() - lam)) if off.any() else 0.0
    return float(max(stat, dual))


def _soft_threshold(a, cut):
    return np.sign(a) * np.maximum(np.abs(a) - cut, 0.0)


def proximal_gradient_solve(
    sigma,
    sigma_prime,
    lam,
    max_iter=20000,
    tol=1e-10,
    accelerate=False,
    stat_tol=None,
    psd_tol=1e-6,
):
    """Minimize the penalized difference loss at one fixed `lam`.

    Step size is 1 / (eigmax(S) * eigmax(S')), the Lipschitz bound of the
    quadratic term's Hessian. Plain iterations keep the objective monotone;
    `accelerate` switches on Nesterov momentum. Stops on max-norm change
    <= `tol` (and, when `stat_tol` is given, on KKT residual <= `stat_tol`).
    Non-convergence is reported, not raised.
    """
    s = check_symmetric(sigma, name="sigma")
    sp = check_symmetric(sigma_prime, name="sigma_prime")
    check_same_dim(s, sp, "sigma", "sigma_prime")
    if lam <= 0:
        raise ValueError("lam must be > 0")
    eig_s = np.linalg.eigvalsh(s)
    eig_sp = np.linalg.eigvalsh(sp)
    if eig_s[0] < -psd_tol or eig_sp[0] < -psd_tol:
        raise NotPSD(
            f"inputs must be PSD (eigenvalues {eig_s[0]:.3g}, {eig_sp[0]:.3g})"
        )
    lipschitz = max(eig_s[-1], 0.0) * max(eig_sp[-1], 0.0)
    step = 1.0 / max(lipschitz, 1e-12)

    d = s.shape[0]
    delta = np.zeros((d, d))
    momentum = delta
    t_k = 1.0
    converged = False
    iterations = 0
    check_every = 10
    for iterations in range(1, max_iter + 1):
        base = momentum if accelerate else delta
        new = _soft_threshold(base - step * loss_gradient(base, s, sp), step * lam)
        change = np.abs(new - delta).max()
        if accelerate:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
            momentum = new + ((t_k - 1.0) / t_next) * (new - delta)
            t_k = t_next
        delta = new
        if change <= tol:
            if stat_tol is None:
                converged = True
                break
            if stationarity_residual(delta, s, sp, lam) <= stat_tol:
                converged = True
                break
        if stat_tol is not None and iterations % check_every == 0:
            if stationarity_residual(delta, s, sp, lam) <= stat_tol:
                converged = True
                break

    residual = stationarity_residual(delta, s, sp, lam)
    return SolveReport(
        delta=delta,
        iterations=iterations,
        final_objective=float(objective_value(delta, s, sp, lam)),
        stationarity_residual=residual,
        converged=converged,
    )
