import math

import numpy as np
import pytest

from gpcover.credible.balls import (
    covers,
    diameter,
    expected_radius_sq,
    l2_distance,
    make_ball,
    quantile_index,
    radius_fixed_a,
    radius_for_prior,
    radius_hb,
    radius_sq_draws,
    tail_variance,
)
from gpcover.credible.band import credible_band
from gpcover.eb.hb import hb_posterior_mean, hb_sample, hyper_posterior
from gpcover.eb.types import HyperPrior
from gpcover.errors import InvalidArgumentError
from gpcover.sequence.model import simulate
from gpcover.sequence.types import PriorSpec
from gpcover.signals.construct import make_f1, make_selfsimilar
from gpcover.signals.types import BasisGrid


def test_quantile_index():
    assert quantile_index(0.25, 100) == 74
    assert quantile_index(0.5, 101) == 50
    assert quantile_index(1e-9, 100) == 99


def test_level_validation():
    with pytest.raises(InvalidArgumentError):
        radius_fixed_a(2.0, 100.0, alpha=1.0)
    with pytest.raises(InvalidArgumentError):
        radius_fixed_a(2.0, 100.0, draws=10)


def test_radius_grows_with_level():
    r90 = radius_fixed_a(3.0, 1e4, alpha=0.1, seed=4)
    r99 = radius_fixed_a(3.0, 1e4, alpha=0.01, seed=4)
    assert r99 >= r90 > 0


def test_tiny_level_sits_below_the_median():
    low = radius_fixed_a(3.0, 1e4, alpha=0.999, seed=4)
    median = radius_fixed_a(3.0, 1e4, alpha=0.5, seed=4)
    assert 0 < low < median


@pytest.mark.slow
def test_radius_settles_with_more_draws():
    coarse = radius_fixed_a(3.0, 1e4, draws=2000, seed=6)
    fine = radius_fixed_a(3.0, 1e4, draws=100_000, seed=7)
    assert coarse == pytest.approx(fine, rel=0.03)


@pytest.mark.slow
def test_hierarchical_radius_is_seed_stable():
    y = simulate(make_f1(), 1e4, 2000, seed=9)
    hpost = hyper_posterior(y, HyperPrior(), grid_size=64)
    r1 = radius_hb(hpost, draws=10_000, seed=1)
    r2 = radius_hb(hpost, draws=10_000, seed=2)
    assert r1 == pytest.approx(r2, rel=0.02)


def test_expected_radius_exponential():
    a, n = 2.0, 100.0
    brute = math.fsum(1 / (a * math.exp(i / a) + n) for i in range(1, 1500))
    assert expected_radius_sq(PriorSpec(a=a), n) == pytest.approx(brute, rel=1e-10)


def test_expected_radius_polynomial():
    prior = PriorSpec(variant="polynomial", alpha=1.0)
    n = 100.0
    i = np.arange(1, 2_000_001, dtype=float)
    brute = math.fsum(1 / (i**3 + n))
    assert expected_radius_sq(prior, n) == pytest.approx(brute, rel=1e-8)


def test_tail_variance_exponential():
    a, n, start = 3.0, 10.0, 200
    brute = math.fsum(math.exp(-math.log(a) - i / a) for i in range(start + 1, start + 400))
    assert tail_variance(PriorSpec(a=a), n, start) == pytest.approx(brute, rel=1e-12)


def test_monte_carlo_mean():
    prior = PriorSpec(a=4.0)
    u = radius_sq_draws(prior, 1e3, draws=20_000, seed=2)
    assert u.mean() == pytest.approx(expected_radius_sq(prior, 1e3), rel=0.03)


def test_shared_noise_makes_radius_monotone_in_n():
    radii = [radius_fixed_a(5.0, n, seed=12) for n in np.geomspace(1e2, 1e8, 13)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(radii, radii[1:]))


def test_same_seed_same_radius():
    assert radius_fixed_a(2.0, 1e4, seed=5, stream=(1, 2)) == radius_fixed_a(
        2.0, 1e4, seed=5, stream=(1, 2)
    )
    assert radius_fixed_a(2.0, 1e4, seed=5, stream=(1, 2)) != radius_fixed_a(
        2.0, 1e4, seed=5, stream=(1, 3)
    )


def test_polynomial_radius():
    r = radius_for_prior(PriorSpec(variant="polynomial", alpha=1.0), 1e4, seed=1)
    assert 0 < r < 1


def test_hierarchical_radius_with_squeezed_prior():
    y = simulate(make_f1(), 1e4, 2000, seed=9)
    hpost = hyper_posterior(y, HyperPrior(lower=5.0, upper=5.0001), grid_size=16)
    r_hb = radius_hb(hpost, draws=4000, seed=3)
    r_fixed = radius_fixed_a(5.0, 1e4, draws=4000, seed=3)
    assert r_hb == pytest.approx(r_fixed, rel=0.05)
    assert radius_hb(hpost, draws=500, seed=8) == radius_hb(hpost, draws=500, seed=8)


def test_hierarchical_draws_spread_like_the_radius():
    y = simulate(make_f1(), 1e4, 2000, seed=9)
    hpost = hyper_posterior(y, HyperPrior(), grid_size=64)
    r = radius_hb(hpost, alpha=0.5, draws=2000, seed=1)
    draws = hb_sample(y, hpost, 2000, seed=2)
    dist = np.linalg.norm(draws - hb_posterior_mean(y, hpost), axis=1)
    assert r == pytest.approx(float(np.median(dist)), rel=0.1)


def test_ball_coverage_and_size():
    truth = make_selfsimilar(1.0, 1.0, 100)
    ball = make_ball(truth.coeffs, 1e-3)
    assert covers(ball, truth)
    far = make_ball(np.zeros(100), 1e-3)
    assert not covers(far, truth)
    assert covers(make_ball(np.zeros(100), 1e-3, inflation=1e4), truth)
    assert diameter(make_ball(np.zeros(3), 0.5, inflation=3.0)) == 3.0


def test_coverage_monotone_in_inflation():
    truth = make_f1()
    rng = np.random.default_rng(0)
    for _ in range(50):
        center = truth.coeffs + rng.standard_normal(truth.N) * 0.01
        radius = float(rng.uniform(0.1, 1.0))
        small, big = make_ball(center, radius, 1.0), make_ball(center, radius, 2.5)
        assert covers(big, truth) or not covers(small, truth)


def test_distance_ignores_trailing_zeros():
    truth = make_selfsimilar(1.0, 1.0, 50)
    center = np.linspace(1, 0, 20)
    padded = np.r_[center, np.zeros(30)]
    assert l2_distance(padded, truth) == pytest.approx(l2_distance(center, truth), rel=1e-12)


def test_ball_validation():
    with pytest.raises(InvalidArgumentError):
        make_ball(np.zeros(3), 0.0)
    with pytest.raises(InvalidArgumentError):
        make_ball(np.zeros(3), 1.0, inflation=0.5)
    assert make_ball(np.zeros(3), 1.0).to_dict()["N"] == 3


def test_band_brackets_the_center_curve():
    rng = np.random.default_rng(1)
    center = make_f1(50).coeffs
    draws = center + 0.05 * rng.standard_normal((200, 50))
    grid = BasisGrid.uniform(0, 1, 101, 50)
    lower, upper, mean_curve = credible_band(draws, center, grid)
    assert np.all(lower <= mean_curve) and np.all(mean_curve <= upper)

    wide_lower, wide_upper, _ = credible_band(draws, center, grid, inflation=2.0)
    assert np.all(wide_upper - wide_lower >= upper - lower - 1e-12)

    with pytest.raises(InvalidArgumentError):
        credible_band(draws, center, BasisGrid.uniform(0, 1, 11, 60))
    with pytest.raises(InvalidArgumentError):
        credible_band(draws, center, grid, keep=0.0)
