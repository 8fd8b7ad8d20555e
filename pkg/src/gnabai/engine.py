"""Single-trial execution: the adaptive round loop, baselines and estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numba
import numpy as np

from .allocation import DEFAULT_ETA, gj_oracle_weights, gna_target_weights, uniform_weights
from .model import BERNOULLI, GAUSSIAN, BanditInstance

GNA = "GNA"
GNA_KNOWN_VARIANCE = "GNAKnownVariance"
UNIFORM = "Uniform"
SUCCESSIVE_REJECTS = "SuccessiveRejects"
GJ_ORACLE = "GJOracle"
ALGORITHM_KINDS = (GNA, GNA_KNOWN_VARIANCE, UNIFORM, SUCCESSIVE_REJECTS, GJ_ORACLE)

A2IPW = "A2IPW"
SAMPLE_MEAN = "SampleMean"

DEFAULT_C_MU = 1e6

_MODE_FIXED = 0
_MODE_GNA = 1
_MODE_GNA_KNOWN = 2


@dataclass(frozen=True)
class AlgorithmSpec:
    """An allocation/estimation rule plus its tuning constants.

    Oracle kinds take the true moments from the instance at run time unless
    ``sigmas``/``means`` are pinned explicitly.

    For the two GNA kinds, round ``t`` mixes the plug-in weights with the
    uniform allocation at rate ``min(1, explore / sqrt(t))``. The mixing
    vanishes asymptotically, so the limiting allocation is unchanged, but
    it stops an arm whose single observation gives a zero variance estimate
    from being starved. ``explore=0`` runs the rule unmodified. ``w_min``
    is an additional constant per-arm floor (off by default). ``estimator`` defaults to
    A2IPW for the two GNA variants and to sample means otherwise.
    """

    kind: str
    eta: float = DEFAULT_ETA
    c_mu: float = DEFAULT_C_MU
    w_min: float = 0.0
    explore: float = 1.0
    sigmas: Optional[tuple] = None
    means: Optional[tuple] = None
    estimator: Optional[str] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ALGORITHM_KINDS:
            raise ValueError(f"unknown algorithm kind {self.kind!r}; expected one of {ALGORITHM_KINDS}")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.c_mu > 0:
            raise ValueError("c_mu must be positive")
        if self.w_min < 0:
            raise ValueError("w_min must be non-negative")
        if self.explore < 0:
            raise ValueError("explore must be non-negative")
        if self.estimator not in (None, A2IPW, SAMPLE_MEAN):
            raise ValueError(f"unknown estimator {self.estimator!r}")

    @property
    def name(self) -> str:
        return self.label or self.kind

    @property
    def estimator_kind(self) -> str:
        if self.estimator is not None:
            return self.estimator
        return A2IPW if self.kind in (GNA, GNA_KNOWN_VARIANCE) else SAMPLE_MEAN

    def with_moments(self, instance: BanditInstance) -> "AlgorithmSpec":
        """Fill in the true moments an oracle kind is allowed to see."""
        if self.kind == GNA_KNOWN_VARIANCE and self.sigmas is None:
            return replace(self, sigmas=tuple(instance.sds))
        if self.kind == GJ_ORACLE and (self.sigmas is None or self.means is None):
            return replace(self, sigmas=tuple(instance.sds), means=tuple(instance.means))
        return self


@dataclass(frozen=True)
class RoundRecord:
    t: int
    arm: int
    outcome: float
    weights_used: np.ndarray
    plugin_means: np.ndarray


@dataclass
class History:
    """Everything observed in one trial, stored column-wise.

    ``plugin_means[t]`` are the truncated running means built from rounds
    before ``t`` and ``weights[t]`` the allocation probabilities used in
    round ``t``. ``counts``, ``sums`` and ``sumsq`` are the running
    per-arm totals after the last round.
    """

    arms: np.ndarray
    outcomes: np.ndarray
    weights: np.ndarray
    plugin_means: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    sumsq: np.ndarray

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def K(self) -> int:
        return self.counts.size

    def record(self, t: int) -> RoundRecord:
        return RoundRecord(t, int(self.arms[t]), float(self.outcomes[t]), self.weights[t], self.plugin_means[t])

    def __iter__(self):
        return (self.record(t) for t in range(len(self)))


@dataclass
class RunOutcome:
    recommended: int
    estimates: np.ndarray
    counts: np.ndarray
    estimator_kind: str
    history: Optional[History] = field(default=None, repr=False)


@numba.njit(cache=True)
def _round_loop(mode, fixed_w, sigmas, means, sds, is_bernoulli, u, gauss, unif, eta, c_mu, w_min, explore,
                arms, outcomes, weights, plugin_means, counts, sums, sumsq):
    T = u.size
    K = means.size
    mean_run = np.zeros(K)
    m2 = np.zeros(K)
    w = np.empty(K)
    var_hat = np.empty(K)
    for t in range(T):
        for a in range(K):
            m = mean_run[a]
            if m > c_mu:
                m = c_mu
            elif m < -c_mu:
                m = -c_mu
            plugin_means[t, a] = m
        if t < K:
            for a in range(K):
                w[a] = 1.0 / K
            arm = t
        else:
            if mode == _MODE_FIXED:
                for a in range(K):
                    w[a] = fixed_w[a]
            else:
                best = 0
                for a in range(1, K):
                    if mean_run[a] > mean_run[best]:
                        best = a
                for a in range(K):
                    if mode == _MODE_GNA:
                        v = m2[a] / counts[a]
                        var_hat[a] = v if v != 0.0 else eta
                    else:
                        var_hat[a] = sigmas[a] * sigmas[a]
                rest = 0.0
                for a in range(K):
                    if a != best:
                        rest += var_hat[a]
                s_best = math.sqrt(var_hat[best])
                root = math.sqrt(rest)
                for a in range(K):
                    w[a] = var_hat[a] / rest * (root / (s_best + root))
                w[best] = s_best / (s_best + root)
                if explore > 0.0:
                    lam = min(1.0, explore / math.sqrt(t + 1.0))
                    for a in range(K):
                        w[a] = (1.0 - lam) * w[a] + lam / K
            if w_min > 0.0:
                for a in range(K):
                    w[a] = (1.0 - K * w_min) * w[a] + w_min
            # inverse CDF over a single uniform
            arm = K - 1
            cum = 0.0
            for a in range(K):
                cum += w[a]
                if u[t] < cum:
                    arm = a
                    break
        for a in range(K):
            weights[t, a] = w[a]
        if is_bernoulli[arm]:
            y = 1.0 if unif[t] < means[arm] else 0.0
        else:
            y = means[arm] + sds[arm] * gauss[t]
        arms[t] = arm
        outcomes[t] = y
        counts[arm] += 1
        sums[arm] += y
        sumsq[arm] += y * y
        # Welford update keeps the running variance non-negative
        delta = y - mean_run[arm]
        mean_run[arm] += delta / counts[arm]
        m2[arm] += delta * (y - mean_run[arm])


def recommend(estimates) -> int:
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size == 0:
        raise ValueError("no estimates to recommend from")
    return int(np.argmax(estimates))


def sample_means(history: History) -> np.ndarray:
    if np.any(history.counts < 1):
        raise ValueError(f"arm {int(np.argmin(history.counts))} was never pulled")
    return history.sums / history.counts


def a2ipw_estimates(history: History, c_mu: float = DEFAULT_C_MU) -> np.ndarray:
    """Adaptive AIPW mean estimate of every arm from a complete history."""
    w = history.weights
    bad = np.flatnonzero(~np.all(w > 0, axis=1))
    if bad.size:
        raise ValueError(f"zero allocation weight in round {int(bad[0])}")
    mu_hat = np.clip(history.plugin_means, -c_mu, c_mu)
    pulled = history.arms[:, None] == np.arange(history.K)
    residual = np.where(pulled, (history.outcomes[:, None] - mu_hat) / w, 0.0)
    return (residual + mu_hat).mean(axis=0)


def psi_scores(history: History, instance: BanditInstance, c_mu: float = DEFAULT_C_MU) -> np.ndarray:
    """Per-round standardised score of each best-vs-arm comparison.

    Returns a ``(T, K)`` array; the best arm's column is NaN. Summed over
    rounds and divided by ``T`` the column for arm ``a`` equals the A2IPW
    gap estimate minus the true gap, scaled by the target-allocation
    asymptotic standard deviation, so each column is a martingale
    difference sequence.
    """
    best = instance.best_arm
    target = gna_target_weights(best, instance.sds)
    var = instance.variances
    mu_hat = np.clip(history.plugin_means, -c_mu, c_mu)
    pulled = history.arms[:, None] == np.arange(history.K)
    term = np.where(pulled, (history.outcomes[:, None] - mu_hat) / history.weights, 0.0) + mu_hat
    scale = np.sqrt(var[best] / target[best] + var / target)
    psi = (term[:, [best]] - term - instance.gaps) / scale
    psi[:, best] = np.nan
    return psi


def _fixed_weights(spec: AlgorithmSpec, instance: BanditInstance) -> np.ndarray:
    if spec.kind == UNIFORM:
        return uniform_weights(instance.K)
    if spec.kind == GJ_ORACLE:
        return gj_oracle_weights(np.asarray(spec.means), np.asarray(spec.sigmas) ** 2)
    return np.empty(0)


def simulate(spec: AlgorithmSpec, instance: BanditInstance, T: int, rng: np.random.Generator) -> History:
    """Run the round loop (K initialisation rounds, then sampling from the rule)."""
    K = instance.K
    if T < K:
        raise ValueError(f"budget T={T} is smaller than K={K}")
    if spec.kind == SUCCESSIVE_REJECTS:
        raise ValueError("successive rejects has no weight-based round loop; use run()")
    spec = spec.with_moments(instance)
    if spec.w_min * K > 1:
        raise ValueError("w_min must not exceed 1/K")
    mode = {GNA: _MODE_GNA, GNA_KNOWN_VARIANCE: _MODE_GNA_KNOWN}.get(spec.kind, _MODE_FIXED)
    fixed_w = _fixed_weights(spec, instance)
    sigmas = np.asarray(spec.sigmas if spec.sigmas is not None else instance.sds, dtype=float)

    kinds = instance.kinds
    is_bernoulli = np.array([k == BERNOULLI for k in kinds])
    u = rng.random(T)
    gauss = rng.standard_normal(T) if GAUSSIAN in kinds else np.zeros(0)
    unif = rng.random(T) if BERNOULLI in kinds else np.zeros(0)

    arms = np.empty(T, dtype=np.int64)
    outcomes = np.empty(T)
    weights = np.empty((T, K))
    plugin_means = np.empty((T, K))
    counts = np.zeros(K, dtype=np.int64)
    sums = np.zeros(K)
    sumsq = np.zeros(K)
    _round_loop(mode, fixed_w, sigmas, instance.means, instance.sds, is_bernoulli, u, gauss, unif,
                float(spec.eta), float(spec.c_mu), float(spec.w_min), float(spec.explore),
                arms, outcomes, weights, plugin_means, counts, sums, sumsq)
    return History(arms, outcomes, weights, plugin_means, counts, sums, sumsq)


def log_bar(K: int) -> float:
    return 0.5 + sum(1.0 / i for i in range(2, K + 1))


def successive_rejects_schedule(K: int, T: int) -> list[int]:
    """Cumulative per-arm pull targets ``n_1 <= ... <= n_{K-1}``."""
    if K < 2:
        raise ValueError("K must be at least 2")
    if T <= K:
        raise ValueError(f"budget T={T} too small for the successive rejects schedule with K={K}")
    lb = log_bar(K)
    return [math.ceil((T - K) / (lb * (K + 1 - k))) for k in range(1, K)]


def run_successive_rejects(instance: BanditInstance, T: int, rng: np.random.Generator,
                           keep_history: bool = False) -> RunOutcome:
    """Successive rejects: K-1 phases, dropping the worst empirical mean each phase.

    Budget left over after the last phase goes to the surviving arm so that
    the pull counts add up to ``T``; it cannot change the recommendation.
    """
    K = instance.K
    schedule = successive_rejects_schedule(K, T)
    survivors = list(range(K))
    counts = np.zeros(K, dtype=np.int64)
    sums = np.zeros(K)
    sumsq = np.zeros(K)
    pulled_arms, pulled_y = [], []

    def pull(a, n):
        if n <= 0:
            return
        y = instance.arms[a].sample(rng, n)
        counts[a] += n
        sums[a] += y.sum()
        sumsq[a] += (y**2).sum()
        if keep_history:
            pulled_arms.append(np.full(n, a))
            pulled_y.append(y)

    for n_k in schedule:
        for a in survivors:
            pull(a, n_k - counts[a])
        means = sums[survivors] / counts[survivors]
        # lowest mean goes; ties drop the highest index
        worst = max((i for i in range(len(survivors)) if means[i] == means.min()), key=lambda i: survivors[i])
        survivors.pop(worst)
    winner = survivors[0]
    pull(winner, T - int(counts.sum()))

    history = None
    if keep_history:
        arms = np.concatenate(pulled_arms)
        ys = np.concatenate(pulled_y)
        history = History(arms, ys, np.full((T, K), np.nan), np.full((T, K), np.nan), counts, sums, sumsq)
    estimates = sums / counts
    return RunOutcome(winner, estimates, counts, SAMPLE_MEAN, history)


def run(spec: AlgorithmSpec, instance: BanditInstance, T: int, rng: np.random.Generator,
        keep_history: bool = False) -> RunOutcome:
    """Execute one trial and recommend an arm."""
    if T < instance.K:
        raise ValueError(f"budget T={T} is smaller than K={instance.K}")
    if spec.kind == SUCCESSIVE_REJECTS:
        return run_successive_rejects(instance, T, rng, keep_history)
    history = simulate(spec, instance, T, rng)
    if spec.estimator_kind == A2IPW:
        estimates = a2ipw_estimates(history, spec.c_mu)
    else:
        estimates = sample_means(history)
    return RunOutcome(recommend(estimates), estimates, history.counts.copy(), spec.estimator_kind,
                      history if keep_history else None)
