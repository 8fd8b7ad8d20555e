"""Worst-case rate constants, divergences and the KKT check for the GNA weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .allocation import gna_target_weights


@dataclass(frozen=True)
class GaussianFamily:
    """Gaussian outcomes with a known, mean-independent variance."""

    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    def check(self, mu: float) -> None:
        if not np.isfinite(mu):
            raise ValueError(f"mean {mu} outside the Gaussian parameter space")

    def variance(self, mu: float) -> float:
        return self.sigma2

    def kl(self, mu: float, nu: float) -> float:
        return kl_gaussian(mu, nu, self.sigma2)

    def kl_curvature(self, mu: float, nu: float) -> float:
        # KL / (mu - nu)^2 is constant for a location family
        return 1.0 / (2.0 * self.sigma2)


@dataclass(frozen=True)
class BernoulliFamily:
    def check(self, mu: float) -> None:
        if not 0.0 < mu < 1.0:
            raise ValueError(f"Bernoulli mean {mu} outside (0, 1)")

    def variance(self, mu: float) -> float:
        self.check(mu)
        return mu * (1.0 - mu)

    def kl(self, mu: float, nu: float) -> float:
        return kl_bernoulli(mu, nu)

    def kl_curvature(self, mu: float, nu: float) -> float:
        return kl_bernoulli(mu, nu) / (nu - mu) ** 2


@dataclass(frozen=True)
class ThetaGrid:
    """Uniform discretisation of a compact mean-parameter interval.

    ``lower == upper`` is allowed and yields a single-point grid.
    """

    lower: float
    upper: float
    step: float = 1e-3

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty grid: lower exceeds upper")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.lower < self.upper and self.step > (self.upper - self.lower) / 10:
            raise ValueError("step must be at most a tenth of the interval width")

    def points(self) -> np.ndarray:
        if self.lower == self.upper:
            return np.array([self.lower])
        n = int(math.floor((self.upper - self.lower) / self.step + 1e-9))
        pts = self.lower + self.step * np.arange(n + 1)
        if pts[-1] < self.upper:
            pts = np.r_[pts, self.upper]
        return pts


@dataclass(frozen=True)
class RateReport:
    rates: np.ndarray  # V(a, mu_dagger) for every arm a
    v_star: float
    arm: int
    mu_dagger: float
    weights: np.ndarray


def rate_V(a: int, sigmas) -> float:
    """``1 / (2 (s_a + sqrt(sum_{b != a} s_b^2))^2)``."""
    sigmas = np.asarray(sigmas, dtype=float)
    if np.any(~(sigmas > 0)):
        raise ValueError("all sigmas must be positive")
    rest = np.sum(np.delete(sigmas, a) ** 2)
    return 1.0 / (2.0 * (sigmas[a] + math.sqrt(rest)) ** 2)


def _all_rates(sigmas: np.ndarray) -> np.ndarray:
    return np.array([rate_V(a, sigmas) for a in range(sigmas.size)])


def v_star(variance_fn: Callable[[float], np.ndarray], theta: ThetaGrid, K: int) -> RateReport:
    """Minimise ``V(a, mu)`` over arms and a grid on Theta, then refine.

    ``variance_fn`` maps a mean parameter to the vector of K standard
    deviations. The refinement pass re-searches one grid cell either side
    of the coarse minimiser at a hundredth of the step.
    """

    def sigmas_at(mu):
        s = np.asarray(variance_fn(mu), dtype=float)
        if s.shape != (K,):
            raise ValueError(f"variance_fn must return {K} standard deviations")
        if np.any(~(s > 0)):
            raise ValueError(f"variance_fn is not positive at mu={mu}")
        return s

    def search(points):
        table = np.array([_all_rates(sigmas_at(mu)) for mu in points])
        i, a = np.unravel_index(np.argmin(table), table.shape)
        return points[i], int(a), table[i]

    pts = theta.points()
    if pts.size == 0:
        raise ValueError("empty grid")
    mu, arm, rates = search(pts)
    if pts.size > 1:
        lo = max(theta.lower, mu - theta.step)
        hi = min(theta.upper, mu + theta.step)
        fine = np.linspace(lo, hi, int(round((hi - lo) / (theta.step / 100))) + 1)
        mu, arm, rates = search(np.r_[fine, mu])
    sig = sigmas_at(mu)
    return RateReport(rates, float(rates[arm]), arm, float(mu), gna_target_weights(arm, sig))


@dataclass(frozen=True)
class BernoulliClosedForms:
    w_best: float
    w_other: float
    v_star_printed: float
    v_star_derived: float
    mu_dagger: float


def bernoulli_closed_forms(K: int, theta: ThetaGrid = ThetaGrid(0.1, 0.9)) -> BernoulliClosedForms:
    """Closed-form Bernoulli weights and both versions of the worst-case constant.

    ``v_star_printed`` evaluates ``1 / (2 (0.5 + sqrt((K - 1) * 0.5))^2)``
    literally. ``v_star_derived`` comes from the general rate with
    ``sigma(mu) = sqrt(mu (1 - mu))``; at the worst case (mu = 1/2) it is
    ``1 / (2 (0.5 + 0.5 sqrt(K - 1))^2)``. The two disagree for every K.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    r = math.sqrt(K - 1)
    printed = 1.0 / (2.0 * (0.5 + math.sqrt((K - 1) * 0.5)) ** 2)
    report = v_star(lambda mu: np.full(K, math.sqrt(mu * (1.0 - mu))), theta, K)
    return BernoulliClosedForms(1.0 / (1.0 + r), 1.0 / (K - 1 + r), printed, report.v_star, report.mu_dagger)


def pairwise_rate(w, sigmas, a_star: int, a: int, delta: float) -> float:
    """Exponent ``delta^2 / (2 (s_*^2 / w_* + s_a^2 / w_a))`` of a best-vs-arm comparison."""
    if a == a_star:
        raise ValueError("a must differ from a_star")
    if not delta > 0:
        raise ValueError("delta must be positive")
    w = np.asarray(w, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if w[a_star] <= 0 or w[a] <= 0:
        raise ValueError("zero weight in pairwise rate")
    return delta**2 / (2.0 * (sigmas[a_star] ** 2 / w[a_star] + sigmas[a] ** 2 / w[a]))


def kl_gaussian(mu: float, nu: float, sigma2: float) -> float:
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return (mu - nu) ** 2 / (2.0 * sigma2)


def kl_bernoulli(p: float, q: float) -> float:
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("Bernoulli parameters must lie strictly inside (0, 1)")
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def binary_relative_entropy(x: float, y: float) -> float:
    """``d(x, y)`` with ``0 log 0 = 0``, so ``d(0, 0) = d(1, 1) = 0``."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError("arguments must lie in [0, 1]")
    if y in (0.0, 1.0):
        if x != y:
            raise ValueError(f"d({x}, {y}) is infinite")
        return 0.0
    out = 0.0
    if x > 0:
        out += x * math.log(x / y)
    if x < 1:
        out += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return out


def fisher_information(model, mu: float) -> float:
    model.check(mu)
    return 1.0 / model.variance(mu)


def small_gap_ratio(model, mu: float, delta: float) -> float:
    """``KL(mu, mu + delta) / delta^2``; tends to half the Fisher information."""
    if delta == 0:
        raise ValueError("delta must be non-zero")
    nu = mu + delta
    model.check(mu)
    model.check(nu)
    return model.kl_curvature(mu, nu)


@dataclass(frozen=True)
class KKTReport:
    residuals: dict
    max_residual: float


def kkt_verify(sigmas, best: int) -> KKTReport:
    """Check the closed-form max-min solution against its optimality system.

    Uses the generalized Neyman weights, ``R = 1 / (s_b + sqrt(S))^2`` with
    ``S = sum_{a != b} s_a^2``, multipliers ``lambda_a = -s_a^2`` and
    ``gamma = (s_b sqrt(S) + S)^2``. Those multipliers satisfy the
    weight-stationarity equations, which are homogeneous in the
    multipliers; the stationarity in ``R`` fixes their scale and is checked
    with ``lambda_a * R / S``. Multiplier residuals are relative to ``gamma``.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    w = gna_target_weights(best, sigmas)
    var = sigmas**2
    mask = np.arange(sigmas.size) != best
    S = var[mask].sum()
    R = 1.0 / (sigmas[best] + math.sqrt(S)) ** 2
    lam = -var[mask]
    D = sigmas[best] * math.sqrt(S) + S
    gamma = D**2
    c = var[best] / w[best] + var[mask] / w[mask]
    lam_scaled = lam * R / S

    residuals = {
        "simplex": abs(w.sum() - 1.0),
        "active_constraints": float(np.max(np.abs(R * c - 1.0))),
        "equal_variance_ratio": float(np.ptp(var[mask] / w[mask]) / np.max(var[mask] / w[mask])),
        "best_arm_balance": abs(w[best] - math.sqrt(var[best] * np.sum(w[mask] ** 2 / var[mask]))),
        "closed_form_best": abs(w[best] - sigmas[best] * math.sqrt(S) / D),
        "closed_form_others": float(np.max(np.abs(w[mask] - var[mask] / D))),
        "stationarity_others": float(np.max(np.abs(-lam * var[mask] / w[mask] ** 2 - gamma)) / gamma),
        "stationarity_best": float(
            np.max(np.abs(var[best] / w[best] ** 2 * lam.sum() - lam * var[mask] / w[mask] ** 2)) / gamma
        ),
        "stationarity_R": abs(1.0 + np.sum(lam_scaled * c)),
        "dual_feasibility": float(max(0.0, lam.max())),
    }
    return KKTReport(residuals, max(residuals.values()))
