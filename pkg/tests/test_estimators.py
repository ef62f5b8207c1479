import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom, chisquare

from alphavol.domains import annulus
from alphavol.estimators import (
    SplitResult,
    bagged_estimate,
    convex_hull_area,
    corrected_volume,
    naive_oracle,
    plug_in,
    split_estimate,
    volume_ci,
    wilson_interval,
)
from alphavol.hull import AlphaHull

from oracles import wilson_by_inversion

RNG = np.random.default_rng
ANN = annulus(0.25, 1)


def test_plug_in_single_point():
    assert plug_in([(0.2, 0.3)], 0.5, 1e-3).value == 0.0


def test_plug_in_inward_bias():
    x = ANN.sample(5000, RNG(0))
    est = plug_in(x, 0.25, 2e-3)
    assert est.upper < ANN.area


def test_corrected_volume_branches():
    assert corrected_volume(2.0, 0.0) == 2.0
    assert corrected_volume(2.0, 0.25) == pytest.approx(2.0 / 0.75)
    assert corrected_volume(2.0, 0.6) == 4.0
    assert corrected_volume(2.0, 1.0) == 4.0
    ps = np.linspace(0, 1, 101)
    v = [corrected_volume(1.0, p) for p in ps]
    assert all(a <= b for a, b in zip(v, v[1:]))


def test_split_validation():
    x = ANN.sample(10, RNG(1))
    for m in (0, 10, 11):
        with pytest.raises(ValueError):
            split_estimate(x, 0.25, m, 1e-2, RNG(0))
    with pytest.raises(ValueError):
        split_estimate(x[:1], 0.25, 1, 1e-2, RNG(0))


def test_split_invariants():
    x = ANN.sample(400, RNG(2))
    for seed in range(5):
        res = split_estimate(x, 0.25, 200, 2e-3, RNG(seed))
        assert res.mu_hat_s <= res.v_hat <= 2 * res.mu_hat_s
        assert res.clamped == (res.p_hat > 0.5)
        assert res.p_hat * (res.n - res.m) == pytest.approx(res.outside)
        assert res.mu_bounds[0] <= res.mu_hat_s <= res.mu_bounds[1]
        assert res.trials == 200


def test_split_uses_rng_permutation():
    x = ANN.sample(300, RNG(3))
    perm = RNG(9).permutation(300)
    res = split_estimate(x, 0.25, 150, 2e-3, RNG(9))
    hull = AlphaHull(x[perm[:150]], 0.25)
    assert res.mu_hat_s == hull.area(2e-3).value
    assert res.outside == int((~hull.contains_many(x[perm[150:]])).sum())


def test_split_identity_branch():
    # second subsample of sample points inside a big-alpha hull of a square
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    inner = RNG(4).uniform(0.2, 0.8, size=(20, 2))
    x = np.vstack([sq, inner])

    class Fixed:
        def permutation(self, n):
            return np.arange(n)

    res = split_estimate(x, 100.0, 4, 1e-4, Fixed())
    assert res.p_hat == 0.0 and res.v_hat == res.mu_hat_s
    ci = volume_ci(res, 0.95)
    assert ci.lower == res.mu_hat_s


def test_split_clamp_branch():
    # hull of two points has no area; everything else falls outside
    x = np.vstack([[[0, 0], [0.1, 0]], RNG(5).uniform(2, 3, size=(10, 2))])

    class Fixed:
        def permutation(self, n):
            return np.arange(n)

    res = split_estimate(x, 0.5, 2, 1e-3, Fixed())
    assert res.p_hat == 1.0 and res.clamped and res.v_hat == 2 * res.mu_hat_s


def test_split_deterministic():
    x = ANN.sample(300, RNG(6))
    assert split_estimate(x, 0.25, 150, 2e-3, RNG(1)) == split_estimate(x, 0.25, 150, 2e-3, RNG(1))


def test_scale_consistency():
    x = ANN.sample(300, RNG(7))
    s = 3.0
    a = split_estimate(x, 0.25, 150, 1e-4, RNG(2))
    b = split_estimate(x * s, 0.25 * s, 150, 1e-4 * s * s, RNG(2))
    assert b.p_hat == a.p_hat
    assert b.mu_bounds[0] <= s * s * a.mu_bounds[1] and s * s * a.mu_bounds[0] <= b.mu_bounds[1]
    assert b.v_hat == pytest.approx(s * s * a.v_hat, rel=1e-3)


def test_bagged():
    x = ANN.sample(300, RNG(8))
    one = bagged_estimate(x, 0.25, 150, 1, 2e-3, RNG(3))
    assert one == split_estimate(x, 0.25, 150, 2e-3, RNG(3)).v_hat
    rng = RNG(4)
    draws = [split_estimate(x, 0.25, 150, 2e-3, rng).v_hat for _ in range(6)]
    bag = bagged_estimate(x, 0.25, 150, 6, 2e-3, RNG(4))
    assert bag == pytest.approx(sum(draws) / 6)
    assert min(draws) <= bag <= max(draws)
    with pytest.raises(ValueError):
        bagged_estimate(x, 0.25, 150, 0)


def test_wilson_reference_values():
    lo, hi = wilson_interval(5, 10, 0.95)
    assert (lo, hi) == pytest.approx((0.2366, 0.7634), abs=1e-4)
    assert lo + hi == pytest.approx(1.0)
    assert wilson_interval(0, 10, 0.95)[0] == 0.0
    assert wilson_interval(10, 10, 0.95)[1] == 1.0


@pytest.mark.parametrize("k,n", [(0, 1), (1, 7), (5, 10), (3, 250), (99, 100), (40, 41)])
@pytest.mark.parametrize("level", [0.5, 0.8, 0.95, 0.999])
def test_wilson_matches_score_inversion(k, n, level):
    assert wilson_interval(k, n, level) == pytest.approx(wilson_by_inversion(k, n, level), abs=1e-9)


def test_wilson_validation():
    for args in [(1, 0, 0.9), (-1, 5, 0.9), (6, 5, 0.9), (1, 5, 0.0), (1, 5, 1.0)]:
        with pytest.raises(ValueError):
            wilson_interval(*args)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 2000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_nesting(kn):
    k, n = kn
    lo90, hi90 = wilson_interval(k, n, 0.90)
    lo95, hi95 = wilson_interval(k, n, 0.95)
    assert lo95 <= lo90 <= k / n <= hi90 <= hi95
    assert 0.0 <= lo95 and hi95 <= 1.0


def _result(mu, k, trials, m=100):
    p = k / trials
    return SplitResult(corrected_volume(mu, p), mu, p, m, m + trials, 0.25, p > 0.5, k, (mu, mu))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 500).flatmap(lambda t: st.tuples(st.integers(0, t), st.just(t))),
       st.floats(0.01, 100), st.sampled_from([0.5, 0.9, 0.95, 0.99]))
def test_volume_ci_contains_estimate(kt, mu, level):
    k, t = kt
    res = _result(mu, k, t)
    ci = volume_ci(res, level)
    assert ci.lower <= res.v_hat <= ci.upper
    assert mu <= ci.lower and ci.upper <= 2 * mu
    assert ci.covers(res.v_hat) and ci.length >= 0


def test_volume_ci_zero_outside():
    ci = volume_ci(_result(2.5, 0, 100), 0.95)
    assert ci.lower == 2.5


def test_conditional_binomial_law():
    # fix S-hat, redraw the second subsample: (n - m) p-hat ~ Bin(n - m, p~)
    rng = RNG(10)
    hull = AlphaHull(ANN.sample(100, rng), 0.25)
    big = ANN.sample(2_000_000, rng)
    p_true = float((~hull.contains_many(big)).mean())
    trials = 12
    counts = np.array([int((~hull.contains_many(ANN.sample(trials, rng))).sum()) for _ in range(3000)])
    probs = binom.pmf(np.arange(trials + 1), trials, p_true)
    # pool sparse tail cells
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for k in range(trials + 1):
        acc_o += (counts == k).sum()
        acc_e += probs[k] * len(counts)
        if acc_e >= 5:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    obs[-1] += acc_o
    exp[-1] += acc_e
    exp = np.array(exp) * sum(obs) / sum(exp)
    assert chisquare(obs, exp).pvalue > 0.001


def test_baselines():
    assert convex_hull_area([(0, 0), (2, 0), (0, 2)]) == pytest.approx(2.0)
    assert convex_hull_area(np.empty((0, 2))) == 0.0
    assert naive_oracle(50, 2.0) == 25.0
