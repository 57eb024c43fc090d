"""
Desk-scale statistical runs on the (1/2, 3) model.

Slow: run with ``pytest -m slow``. Seeds are fixed, so every assertion is
deterministic; tolerances leave room for the sampling error at these sizes.
"""

import math

import numpy as np
import pytest

from skewshadow.asymptotics import (
    RateFunction,
    chernoff_tail,
    empirical_exponent,
    rate_function,
    ruin_bounds,
    ruin_probability_mc,
    solve_ruin_exponent,
    tail_probability_mc,
)
from skewshadow.model import normalize, validate
from skewshadow.montecarlo import phase_sweep, wilson_interval
from skewshadow.shadow import k_fast, k_naive, oracle_agrees, oracle_radius
from skewshadow.walk import derive_stream, sample_noise, sample_walk

pytestmark = pytest.mark.slow

ACCEPTANCE_SEED = 20240611


def _grid_rate(params, x, span=40.0, points=400_001):
    """sup_t [t x - Lambda(t)] over a plain grid of t."""
    t = np.linspace(-span, span, points)
    values = t * x - (np.logaddexp(t * params.a0, t * params.a1) - math.log(2))
    return float(values.max())


class TestOracleEquivalence:
    def test_random_instances(self, params):
        """1000 instances: oracle radius = d K_naive and K_fast = K_naive."""
        rng = np.random.default_rng(ACCEPTANCE_SEED)
        lengths = rng.integers(10, 501, size=1000)
        scales = (1e-6, 1e-3, 1.0)

        for index, n in enumerate(lengths):
            d = scales[index % 3]
            stream = derive_stream(ACCEPTANCE_SEED, index)
            walk = sample_walk(params, int(n), stream)
            pseudo = sample_noise(walk, d, stream)

            naive = k_naive(walk, pseudo)
            fast = k_fast(walk, pseudo)
            radius, _ = oracle_radius(walk, pseudo)

            assert oracle_agrees(d * naive.k_statistic, radius), (index, n, d)
            assert fast.k_statistic == pytest.approx(naive.k_statistic, rel=1e-10)
            assert naive.k_statistic <= naive.d_bound * (1 + 1e-12)


class TestCriticalExponent:
    def test_running_example(self, params):
        solution = solve_ruin_exponent(params)

        assert solution.b < 1 < solution.c0
        assert solution.b == pytest.approx(0.5233, abs=5e-4)

    def test_golden_ratio(self, golden_params, golden_b):
        b = solve_ruin_exponent(golden_params).b
        assert b == pytest.approx(golden_b, abs=1e-10)

    def test_inverse_map(self, params):
        """(1/3, 2) normalizes to (1/2, 3)."""
        inverted = normalize(validate(1 / 3, 2.0))

        assert inverted.inverted is True
        assert solve_ruin_exponent(inverted).b == pytest.approx(
            solve_ruin_exponent(params).b, abs=1e-9
        )


class TestPhaseTransition:
    @pytest.fixture(scope="class")
    def cells(self):
        model = normalize(validate(0.5, 3.0))
        sweep = phase_sweep(
            model, 1.0, [1.0, 3.0], [200, 800, 3200], samples=2000, seed=7, threads=0
        )
        return {(cell.c, cell.n): cell.estimate for cell in sweep}

    def test_below_critical_vanishes(self, cells):
        """c = 1 < c0: shadowing probability drops with n."""
        p = [cells[(1.0, n)].p_hat for n in (200, 800, 3200)]

        assert p[0] > p[1] > p[2]
        assert cells[(1.0, 3200)].ci_high < cells[(1.0, 200)].ci_low

    def test_above_critical_saturates(self, cells):
        """c = 3 > c0: almost every pseudo-orbit is shadowed."""
        assert cells[(3.0, 3200)].p_hat >= cells[(3.0, 200)].p_hat
        assert cells[(3.0, 3200)].p_hat > 0.98

    def test_statistic_below_bound_at_full_length(self, params):
        for index in range(20):
            stream = derive_stream(ACCEPTANCE_SEED + 1, index)
            walk = sample_walk(params, 3200, stream)
            report = k_fast(walk, sample_noise(walk, 1.0, stream))
            assert report.k_statistic <= report.d_bound * (1 + 1e-12)


class TestRuinExponent:
    @pytest.fixture(scope="class")
    def estimates(self):
        model = normalize(validate(0.5, 3.0))
        return {
            level: ruin_probability_mc(model, level, 1_000_000, seed=3, threads=0)
            for level in (3.0, 5.0, 8.0)
        }

    def test_exponent_near_b(self, params, estimates):
        b = solve_ruin_exponent(params).b
        for level, estimate in estimates.items():
            exponent = empirical_exponent(estimate.p_hat, level)
            assert b - 0.15 <= exponent <= b + 0.15, level

    def test_gap_tightens(self, params, estimates):
        b = solve_ruin_exponent(params).b
        gaps = {
            level: abs(empirical_exponent(estimate.p_hat, level) - b)
            for level, estimate in estimates.items()
        }
        assert gaps[8.0] < gaps[3.0]

    def test_within_martingale_bounds(self, params, estimates):
        for level, estimate in estimates.items():
            lower, upper = ruin_bounds(params, level)
            assert estimate.ci_high >= lower * 0.98
            assert estimate.ci_low <= upper


class TestRateFunction:
    def test_increasing_on_grid(self, params):
        rate = RateFunction(params)
        grid = np.linspace(rate.max_eps / 100, rate.max_eps, 100)
        values = [rate(eps) for eps in grid]

        assert all(a < b for a, b in zip(values, values[1:]))

    def test_boundary_against_grid_search(self, params):
        eps = params.v - params.a0
        h = rate_function(params, eps)

        assert h == pytest.approx(_grid_rate(params, params.a0), abs=1e-6)
        assert h == pytest.approx(math.log(2), abs=1e-6)

    def test_interior_against_grid_search(self, params):
        assert rate_function(params, params.v) == pytest.approx(
            _grid_rate(params, 0.0), abs=1e-6
        )

    def test_monte_carlo_tail(self, params):
        """10**6 walks of length 60: frequency of S_60 < 0 matches the binomial sum."""
        exact = chernoff_tail(params, 60, params.v)
        estimate = tail_probability_mc(params, 60, params.v, 1_000_000, seed=9)
        low, high = wilson_interval(estimate.successes, estimate.samples, 0.9999)

        assert low <= exact <= high

    def test_chernoff_gap_shrinks(self, params):
        """-ln P / n stays above h(v) and approaches it."""
        h = rate_function(params, params.v)
        exponents = [
            -math.log(chernoff_tail(params, n, params.v)) / n for n in (60, 600, 6000)
        ]

        assert all(e >= h for e in exponents)
        assert exponents[0] - h > exponents[1] - h > exponents[2] - h
        assert exponents[2] - h < 0.2 * (exponents[0] - h)
