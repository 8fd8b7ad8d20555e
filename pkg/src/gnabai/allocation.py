"""Arm-allocation rules: generalized Neyman weights, baselines and oracles."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np
from scipy.optimize import brentq

DEFAULT_ETA = 1e-6
SIMPLEX_ATOL = 1e-12


class ConvergenceError(RuntimeError):
    """Raised when a root-finding solve does not meet its tolerance."""


@dataclass(frozen=True)
class VarianceEstimates:
    """Plug-in moments available at the start of a round.

    ``sigma2_hat`` is already floored (every entry >= eta > 0).
    """

    sigma2_hat: np.ndarray
    mu_tilde: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        for name in ("sigma2_hat", "mu_tilde", "counts"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if not (self.sigma2_hat.shape == self.mu_tilde.shape == self.counts.shape):
            raise ValueError("sigma2_hat, mu_tilde and counts must have equal shapes")
        if np.any(~(self.sigma2_hat > 0)):
            raise ValueError("sigma2_hat must be strictly positive (apply floor_variance first)")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")


def check_weights(w, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Validate a point in the open simplex and return it as an array."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("weights must be a vector of length >= 2")
    if np.any(w <= 0) or np.any(w >= 1):
        raise ValueError(f"weights must lie in (0, 1), got {w}")
    if abs(w.sum() - 1.0) > atol:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def gna_target_weights(best: int, sigmas) -> np.ndarray:
    """Generalized Neyman allocation for a given best arm.

    The best arm gets ``s_b / (s_b + sqrt(sum_{c != b} s_c^2))`` and the
    remaining mass is split in proportion to the other arms' variances.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.ndim != 1 or sigmas.size < 2:
        raise ValueError("sigmas must be a vector of length >= 2")
    if np.any(~(sigmas > 0)):
        raise ValueError("all sigmas must be positive")
    if not 0 <= best < sigmas.size:
        raise IndexError(f"best arm {best} out of range")
    var = sigmas**2
    others = np.ones(sigmas.size, dtype=bool)
    others[best] = False
    rest = var[others].sum()
    root = np.sqrt(rest)
    # sqrt(S) / (s_b + sqrt(S)) instead of 1 - w_best: no cancellation, and
    # for two arms both weights come out as the exact Neyman ratios
    w = var / rest * (root / (sigmas[best] + root))
    w[best] = sigmas[best] / (sigmas[best] + root)
    return w


def floor_variance(sigma2_tilde: float, eta: float = DEFAULT_ETA) -> float:
    """Replace an exactly-zero variance estimate by ``eta``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    if sigma2_tilde < 0:
        raise ValueError(f"variance estimate must be non-negative, got {sigma2_tilde}")
    return sigma2_tilde if sigma2_tilde != 0 else eta


def estimated_best_arm(mu_tilde) -> int:
    # np.argmax breaks ties towards the lowest index
    return int(np.argmax(mu_tilde))


def gna_estimated_weights(est: VarianceEstimates) -> np.ndarray:
    if np.any(est.counts < 1):
        raise ValueError("every arm needs at least one observation before estimating weights")
    return gna_target_weights(estimated_best_arm(est.mu_tilde), np.sqrt(est.sigma2_hat))


def apply_weight_floor(w, w_min: float) -> np.ndarray:
    """Mix with the uniform allocation so that every entry is at least ``w_min``."""
    w = np.asarray(w, dtype=float)
    if w_min <= 0:
        return w
    K = w.size
    if K * w_min > 1:
        raise ValueError("w_min must not exceed 1/K")
    return (1.0 - K * w_min) * w + w_min


def uniform_weights(K: int) -> np.ndarray:
    if K < 2:
        raise ValueError("K must be at least 2")
    return np.full(K, 1.0 / K)


def _gj_pairwise_rates(w, means, variances, best):
    gaps = means[best] - means
    return gaps**2 / (2.0 * (variances[best] / w[..., best, None] + variances / w))


def gj_rate_objective(means, variances) -> Callable[[np.ndarray], np.ndarray]:
    """Min over suboptimal arms of the Gaussian pairwise exponent, vectorised over rows."""
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    best = int(np.argmax(means))
    mask = np.arange(means.size) != best

    def objective(w):
        rates = _gj_pairwise_rates(np.asarray(w, dtype=float), means, variances, best)
        return rates[..., mask].min(axis=-1)

    return objective


def gna_rate_objective(best: int, sigmas) -> Callable[[np.ndarray], np.ndarray]:
    """``min_{a != best} 1 / (s_best^2 / w_best + s_a^2 / w_a)``, vectorised over rows."""
    var = np.asarray(sigmas, dtype=float) ** 2
    mask = np.arange(var.size) != best

    def objective(w):
        w = np.asarray(w, dtype=float)
        total = var[best] / w[..., best, None] + var / w
        return (1.0 / total)[..., mask].min(axis=-1)

    return objective


def gj_oracle_weights(means, variances, tol: float = 1e-10, maxiter: int = 10_000) -> np.ndarray:
    """Full-information Gaussian allocation that equalises pairwise exponents.

    Solved by nested 1-D root finding. For a trial best-arm weight the
    common exponent ``r`` is found so that the implied suboptimal weights
    ``w_a(r) = s_a^2 / (gap_a^2 / (2 r) - s_b^2 / w_b)`` fill the simplex;
    the outer solve then drives the balance condition
    ``w_b^2 / s_b^2 = sum_a w_a^2 / s_a^2`` to zero.
    """
    means = np.asarray(means, dtype=float)
    variances = np.asarray(variances, dtype=float)
    if means.shape != variances.shape or means.ndim != 1 or means.size < 2:
        raise ValueError("means and variances must be vectors of equal length >= 2")
    if np.any(~(variances > 0)):
        raise ValueError("variances must be positive")
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    best = int(np.argmax(means))
    if np.sum(means == means[best]) > 1:
        raise ValueError("non-unique best arm")
    mask = np.arange(means.size) != best
    gap2 = (means[best] - means[mask]) ** 2
    var_o = variances[mask]
    var_b = variances[best]

    i_min = int(np.argmin(gap2))
    # gap2 * s_min - base, written so it is exactly >= 0
    slack_scale = gap2 / gap2[i_min] - 1.0

    def others_given(w_b):
        # 1 / (2 r) = s_min + exp(u), with s_min = base / min(gap2) the pole
        base = var_b / w_b

        def weights(u):
            return var_o / (gap2 * np.exp(u) + base * slack_scale)

        def excess(u):
            return w_b + weights(u).sum() - 1.0

        u_lo = np.log(var_o[i_min] / gap2[i_min])
        u_hi = np.log(np.sum(var_o / gap2) / (1.0 - w_b)) + 1.0
        u = brentq(excess, u_lo, u_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=maxiter)
        return weights(u)

    def balance(w_b):
        w_o = others_given(w_b)
        return w_b**2 / var_b - np.sum(w_o**2 / var_o)

    eps = 1e-12
    w_b = brentq(balance, eps, 1.0 - eps, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=maxiter)
    w = np.empty_like(means)
    w[best] = w_b
    w[mask] = others_given(w_b)

    rates = _gj_pairwise_rates(w, means, variances, best)[mask]
    residuals = {
        "simplex": abs(w.sum() - 1.0),
        "rate_spread": float(rates.max() - rates.min()),
        "balance": abs(balance(w_b)),
    }
    if max(residuals.values()) > tol:
        raise ConvergenceError(f"GJ solve did not converge: residuals {residuals}")
    return w / w.sum()


def bruteforce_maxmin_weights(objective: Callable[[np.ndarray], np.ndarray], K: int, grid_step: float) -> np.ndarray:
    """Exhaustive simplex-grid maximiser of ``objective`` (a test oracle)."""
    if K > 4:
        raise ValueError("exhaustive grid search is limited to K <= 4")
    if K < 2:
        raise ValueError("K must be at least 2")
    if not 1e-3 <= grid_step <= 1e-1:
        raise ValueError("grid_step must lie in [1e-3, 1e-1]")
    grid = _composition_grid(K, int(round(1.0 / grid_step)))
    values = objective(grid)
    return grid[int(np.argmax(values))]


def _composition_grid(K: int, n: int) -> np.ndarray:
    """Rows ``c / n`` for every composition ``c`` of ``n`` into ``K`` positive integers."""
    if n < K:
        raise ValueError("grid too coarse for K arms")
    # stars and bars: choose K-1 cut points among 1..n-1
    cuts = np.array(list(combinations(range(1, n), K - 1)), dtype=np.int64)
    edges = np.column_stack([np.zeros(len(cuts), dtype=np.int64), cuts, np.full(len(cuts), n)])
    return np.diff(edges, axis=1) / n
