"""Fast invariant checks runnable without pytest (``gnabai selftest``)."""

from __future__ import annotations

import math

import numpy as np

from . import allocation, bounds, engine, model


def _closed_form_weights():
    for K in (2, 3, 5):
        w = allocation.gna_target_weights(0, np.ones(K))
        r = math.sqrt(K - 1)
        expected = np.r_[1 / (1 + r), np.full(K - 1, 1 / (K - 1 + r))]
        if not np.allclose(w, expected, rtol=0, atol=1e-12):
            return False
    return True


def _kkt_random():
    rng = np.random.default_rng(20240101)
    return all(bounds.kkt_verify(rng.uniform(0.1, 5, 3), 0).max_residual <= 1e-10 for _ in range(50))


def _neyman_two_arms():
    w = allocation.gna_target_weights(0, [3.0, 1.0])
    gj = allocation.gj_oracle_weights([1.0, 0.9], [9.0, 1.0])
    return np.allclose(w, [0.75, 0.25], atol=1e-15) and np.allclose(gj, [0.75, 0.25], atol=1e-6)


def _scale_invariance():
    rng = np.random.default_rng(7)
    s = rng.uniform(0.1, 5, 4)
    return np.allclose(allocation.gna_target_weights(1, s), allocation.gna_target_weights(1, 3.7 * s), atol=1e-12)


def _small_gap_limit():
    fam = bounds.BernoulliFamily()
    ok = all(
        abs(bounds.small_gap_ratio(fam, mu, 1e-2) - bounds.fisher_information(fam, mu) / 2)
        <= 0.05 * bounds.fisher_information(fam, mu) / 2
        for mu in (0.3, 0.5)
    )
    gauss = bounds.GaussianFamily(2.0)
    return ok and bounds.small_gap_ratio(gauss, 0.3, 0.1) == bounds.fisher_information(gauss, 0.3) / 2


def _bernoulli_v_star():
    cf = bounds.bernoulli_closed_forms(3)
    return abs(cf.v_star_derived - 0.343146) < 1e-6 and abs(cf.mu_dagger - 0.5) <= 1e-3


def _determinism_and_conservation():
    inst = model.make_gaussian_instance([1.0, 0.9, 0.8], [2.0, 1.0, 0.5])
    spec = engine.AlgorithmSpec(engine.GNA)
    a = engine.run(spec, inst, 300, model.rng_stream(5, 3))
    b = engine.run(spec, inst, 300, model.rng_stream(5, 3))
    return a.recommended == b.recommended and np.array_equal(a.estimates, b.estimates) and a.counts.sum() == 300


CHECKS = [
    ("closed-form Bernoulli weights", _closed_form_weights),
    ("KKT residuals on random sigmas", _kkt_random),
    ("two-arm Neyman ratio (GNA and GJ)", _neyman_two_arms),
    ("scale invariance of GNA weights", _scale_invariance),
    ("small-gap KL limit", _small_gap_limit),
    ("Bernoulli worst-case constant", _bernoulli_v_star),
    ("run determinism and count conservation", _determinism_and_conservation),
]


def run_selftest(echo=print) -> bool:
    ok = True
    for name, check in CHECKS:
        passed = bool(check())
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
