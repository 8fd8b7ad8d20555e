"""Bandit instances, outcome sampling and reproducible random streams.

Arm indices are 0-based throughout the library.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"

MU_PATTERNS = ("two-fixed", "all-095")

# spawn-key channels for the per-trial streams
INSTANCE_CHANNEL = 0
RUN_CHANNEL = 1


@dataclass(frozen=True)
class ArmLaw:
    """Outcome law of a single arm, parameterised by its mean."""

    kind: str
    mean: float
    sd: float

    def __post_init__(self):
        if self.kind == GAUSSIAN:
            if not (np.isfinite(self.sd) and self.sd > 0):
                raise ValueError(f"Gaussian sd must be finite and > 0, got {self.sd}")
        elif self.kind == BERNOULLI:
            if not 0.0 < self.mean < 1.0:
                raise ValueError(f"Bernoulli mean must lie in (0, 1), got {self.mean}")
            expected = np.sqrt(self.mean * (1.0 - self.mean))
            if not np.isclose(self.sd, expected, rtol=0, atol=1e-15):
                raise ValueError("Bernoulli sd is determined by its mean")
        else:
            raise ValueError(f"unknown arm kind {self.kind!r}")

    @classmethod
    def gaussian(cls, mean: float, sd: float) -> "ArmLaw":
        return cls(GAUSSIAN, float(mean), float(sd))

    @classmethod
    def bernoulli(cls, mean: float) -> "ArmLaw":
        mean = float(mean)
        if not 0.0 < mean < 1.0:
            raise ValueError(f"Bernoulli mean must lie in (0, 1), got {mean}")
        return cls(BERNOULLI, mean, float(np.sqrt(mean * (1.0 - mean))))

    def variance(self) -> float:
        if self.kind == BERNOULLI:
            return self.mean * (1.0 - self.mean)
        return self.sd**2

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == BERNOULLI:
            return (rng.random(size) < self.mean).astype(float)
        return self.mean + self.sd * rng.standard_normal(size)


@dataclass(frozen=True)
class BanditInstance:
    """The true distribution: one ``ArmLaw`` per arm, with a unique best arm."""

    arms: tuple[ArmLaw, ...]

    def __post_init__(self):
        if len(self.arms) < 2:
            raise ValueError("an instance needs at least 2 arms")
        means = np.array([arm.mean for arm in self.arms])
        if np.sum(means == means.max()) > 1:
            raise ValueError("non-unique best arm")

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([arm.mean for arm in self.arms])

    @property
    def sds(self) -> np.ndarray:
        return np.array([arm.sd for arm in self.arms])

    @property
    def variances(self) -> np.ndarray:
        return np.array([arm.variance() for arm in self.arms])

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))

    @property
    def gaps(self) -> np.ndarray:
        means = self.means
        return means.max() - means

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(arm.kind for arm in self.arms)


def make_gaussian_instance(means: Sequence[float], sds: Sequence[float]) -> BanditInstance:
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    if means.ndim != 1 or means.shape != sds.shape:
        raise ValueError("means and sds must be vectors of equal length")
    if np.any(~(sds > 0)):
        raise ValueError("all sds must be positive")
    return BanditInstance(tuple(ArmLaw.gaussian(m, s) for m, s in zip(means, sds)))


def make_bernoulli_instance(means: Sequence[float]) -> BanditInstance:
    return BanditInstance(tuple(ArmLaw.bernoulli(m) for m in np.asarray(means, dtype=float)))


def rng_stream(master_seed: int, trial_index: int, channel: int = RUN_CHANNEL) -> np.random.Generator:
    """Counter-based stream keyed by ``(master_seed, trial_index, channel)``.

    The stream depends only on its key, so trials can run in any order or
    on any worker and still see the same draws.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index), int(channel)))
    return np.random.Generator(np.random.Philox(seq))


def sample_outcome(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    if not 0 <= arm < instance.K:
        raise IndexError(f"arm {arm} out of range for K={instance.K}")
    return float(instance.arms[arm].sample(rng))


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for the randomised simulation-study instances.

    ``mu_pattern`` is ``"two-fixed"`` (best mean 1.0, second mean ``mu2``,
    the rest Uniform[0.90, 0.95]) or ``"all-095"`` (best 1.0, all others
    0.95). Standard deviations are a random permutation of
    ``{sigma_bar, sigma_low, u_3, ..., u_K}`` with ``u_i ~ Uniform[sigma_low, sigma_bar]``.
    """

    K: int
    mu_pattern: str
    sigma_bar: float
    distribution_kind: str = GAUSSIAN
    mu2: float = 0.90
    sigma_low: float = 0.1


def paper_instance_generator(spec: InstanceSpec, rng: np.random.Generator) -> BanditInstance:
    if spec.mu_pattern not in MU_PATTERNS:
        raise ValueError(f"unsupported mu_pattern {spec.mu_pattern!r}; expected one of {MU_PATTERNS}")
    if spec.K < 2:
        raise ValueError("K must be at least 2")
    if not spec.sigma_bar > spec.sigma_low:
        raise ValueError(f"sigma_bar must exceed {spec.sigma_low}")
    K = spec.K
    if spec.mu_pattern == "all-095":
        means = np.r_[1.0, np.full(K - 1, 0.95)]
    else:
        means = np.r_[1.0, spec.mu2, rng.uniform(0.90, 0.95, size=K - 2)]
    free = rng.uniform(spec.sigma_low, spec.sigma_bar, size=K - 2)
    sds = rng.permutation(np.r_[spec.sigma_bar, spec.sigma_low, free])
    if spec.distribution_kind == GAUSSIAN:
        return make_gaussian_instance(means, sds)
    if spec.distribution_kind == BERNOULLI:
        raise ValueError("the simulation-study generator only supports Gaussian outcomes")
    raise ValueError(f"unknown distribution kind {spec.distribution_kind!r}")
