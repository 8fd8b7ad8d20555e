import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from gnabai import allocation as al
from gnabai import bounds as bd
from gnabai.bounds import BernoulliFamily, GaussianFamily, ThetaGrid


def test_rate_v_examples():
    assert bd.rate_V(0, [1, 1]) == 0.125
    assert bd.rate_V(0, [2, 1, 1]) == pytest.approx(1 / (2 * (2 + math.sqrt(2)) ** 2), rel=1e-14)
    assert bd.rate_V(0, [2, 1, 1]) == pytest.approx(0.0428932, abs=1e-7)


@given(st.lists(st.floats(0.1, 5.0), min_size=2, max_size=6), st.data())
def test_rate_v_equals_pairwise_rate_at_target(sigmas, data):
    # with arm a best and unit gaps, every pairwise exponent at the target weights equals V(a)
    a = data.draw(st.integers(0, len(sigmas) - 1))
    w = al.gna_target_weights(a, sigmas)
    for c in range(len(sigmas)):
        if c != a:
            assert bd.pairwise_rate(w, sigmas, a, c, 1.0) == pytest.approx(bd.rate_V(a, sigmas), rel=1e-10)


def test_pairwise_rate_example():
    assert bd.pairwise_rate([0.5, 0.5], [1, 1], 0, 1, 0.2) == pytest.approx(0.005)
    with pytest.raises(ValueError):
        bd.pairwise_rate([0.5, 0.5], [1, 1], 0, 0, 0.2)


def test_v_star_single_point_grid():
    sig = np.array([2.0, 1.0, 1.0])
    rep = bd.v_star(lambda mu: sig, ThetaGrid(0.3, 0.3), 3)
    assert rep.v_star == min(bd.rate_V(a, sig) for a in range(3))
    assert rep.arm == 0 and rep.mu_dagger == 0.3
    np.testing.assert_allclose(rep.weights, al.gna_target_weights(0, sig))


def test_v_star_against_dense_scan():
    # a mean-dependent sd profile with an interior worst case, scanned densely by hand
    def profile(mu):
        return np.array([1.0 + (mu - 0.37) ** 2, 0.5 + 0.1 * mu, 0.8 - 0.2 * mu])

    rep = bd.v_star(profile, ThetaGrid(0.0, 1.0, 1e-2), 3)
    mus = np.linspace(0, 1, 200_001)
    dense = min(min(bd.rate_V(a, profile(m)) for a in range(3)) for m in mus[::50])
    assert rep.v_star <= dense + 1e-12
    assert rep.v_star == pytest.approx(min(bd.rate_V(a, profile(rep.mu_dagger)) for a in range(3)))


def test_theta_grid_validation():
    with pytest.raises(ValueError):
        ThetaGrid(0.9, 0.1)
    with pytest.raises(ValueError):
        ThetaGrid(0.1, 0.9, 0.5)
    pts = ThetaGrid(0.1, 0.9, 0.05).points()
    assert pts[0] == 0.1 and pts[-1] == pytest.approx(0.9) and len(pts) == 17


@pytest.mark.parametrize("K, wb, wo", [(2, 0.5, 0.5), (3, 0.414214, 0.292893), (5, 1 / 3, 1 / 6)])
def test_bernoulli_closed_form_weights(K, wb, wo):
    cf = bd.bernoulli_closed_forms(K)
    assert cf.w_best == pytest.approx(wb, abs=1e-6)
    assert cf.w_other == pytest.approx(wo, abs=1e-6)
    assert cf.w_best + (K - 1) * cf.w_other == pytest.approx(1.0, abs=1e-15)


def test_bernoulli_v_star_variants():
    cf = bd.bernoulli_closed_forms(3)
    assert cf.v_star_printed == pytest.approx(1 / (2 * (0.5 + math.sqrt(2 * 0.5)) ** 2), rel=1e-14)
    assert cf.v_star_derived == pytest.approx(1 / (2 * (0.5 + 0.5 * math.sqrt(2)) ** 2), abs=1e-9)
    assert abs(cf.mu_dagger - 0.5) <= 1e-3
    # sqrt((K - 1) / 2) against sqrt(K - 1) / 2: the two constants never coincide
    for K in (2, 4):
        cf = bd.bernoulli_closed_forms(K)
        assert cf.v_star_printed < cf.v_star_derived


@pytest.mark.parametrize("args, expected", [((0.3, 0.3, 2.0), 0.0), ((1, 0, 1), 0.5), ((2, 0, 4), 0.5)])
def test_kl_gaussian_examples(args, expected):
    assert bd.kl_gaussian(*args) == expected


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4))
def test_kl_gaussian_matches_quadrature(mu, nu, s2):
    p, q = stats.norm(mu, math.sqrt(s2)), stats.norm(nu, math.sqrt(s2))
    lo, hi = min(mu, nu) - 12 * math.sqrt(s2), max(mu, nu) + 12 * math.sqrt(s2)
    value, _ = integrate.quad(lambda x: p.pdf(x) * (p.logpdf(x) - q.logpdf(x)), lo, hi, limit=200)
    assert bd.kl_gaussian(mu, nu, s2) == pytest.approx(value, abs=1e-8)


def test_kl_bernoulli_examples():
    assert bd.kl_bernoulli(0.4, 0.4) == 0.0
    assert bd.kl_bernoulli(0.5, 0.25) == pytest.approx(0.143841, abs=1e-6)
    assert bd.kl_bernoulli(0.25, 0.5) == pytest.approx(0.130812, abs=1e-6)
    with pytest.raises(ValueError):
        bd.kl_bernoulli(0.0, 0.5)


@given(st.floats(1e-3, 1 - 1e-3), st.floats(1e-3, 1 - 1e-3))
def test_kl_bernoulli_matches_scipy_entropy(p, q):
    assert bd.kl_bernoulli(p, q) == pytest.approx(stats.entropy([p, 1 - p], [q, 1 - q]), rel=1e-9, abs=1e-14)
    assert bd.kl_bernoulli(p, q) >= 0


def test_binary_relative_entropy():
    assert bd.binary_relative_entropy(0, 0) == 0
    assert bd.binary_relative_entropy(1, 1) == 0
    assert bd.binary_relative_entropy(0.5, 0.25) == pytest.approx(0.143841, abs=1e-6)
    assert bd.binary_relative_entropy(0, 0.5) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        bd.binary_relative_entropy(0.5, 0.0)


@given(st.floats(0, 1), st.floats(1e-3, 1 - 1e-3))
def test_binary_relative_entropy_matches_scipy(x, y):
    assert bd.binary_relative_entropy(x, y) == pytest.approx(stats.entropy([x, 1 - x], [y, 1 - y]), abs=1e-12)


def test_fisher_information():
    assert bd.fisher_information(BernoulliFamily(), 0.5) == 4
    assert bd.fisher_information(GaussianFamily(2.0), 0.7) == 0.5
    assert bd.fisher_information(BernoulliFamily(), 0.1) == pytest.approx(11.111, abs=1e-3)


def test_small_gap_ratio_examples():
    # kl(0.5, 0.51) / 1e-4 evaluates to 2.000400; the limit is I/2 = 2
    assert bd.small_gap_ratio(BernoulliFamily(), 0.5, 0.01) == pytest.approx(2.0004, abs=1e-4)
    for d in (1e-1, 1e-3, -0.7):
        assert bd.small_gap_ratio(GaussianFamily(1.0), 0.2, d) == pytest.approx(0.5, rel=1e-12)
    target = 1 / (2 * 0.21)
    assert abs(bd.small_gap_ratio(BernoulliFamily(), 0.3, 1e-3) / target - 1) <= 0.01


@pytest.mark.parametrize("mu", [0.1, 0.3, 0.5, 0.8])
def test_small_gap_ratio_first_order_convergence(mu):
    fam = BernoulliFamily()
    half_info = bd.fisher_information(fam, mu) / 2
    deltas = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    deltas = deltas[mu + deltas < 1]
    rel = np.array([abs(bd.small_gap_ratio(fam, mu, d) / half_info - 1) for d in deltas])
    C = np.max(rel / deltas)
    assert np.all(rel <= C * deltas + 1e-12)
    # once delta is small the error shrinks linearly: a decade per decade
    assert np.all(np.diff(np.log10(rel))[-2:] < -0.9)


def test_small_gap_ratio_domain():
    with pytest.raises(ValueError):
        bd.small_gap_ratio(BernoulliFamily(), 0.995, 0.01)
    with pytest.raises(ValueError):
        bd.small_gap_ratio(GaussianFamily(1.0), 0.0, 0.0)


@pytest.mark.parametrize("sigmas", [[2, 1, 1], [1, 1, 1], [0.3, 4.0, 1.2, 2.2]])
def test_kkt_examples(sigmas):
    assert bd.kkt_verify(sigmas, 0).max_residual <= 1e-10


@given(st.lists(st.floats(0.1, 5.0), min_size=3, max_size=3), st.integers(0, 2))
def test_kkt_random(sigmas, best):
    rep = bd.kkt_verify(sigmas, best)
    assert rep.max_residual <= 1e-9, rep.residuals
