import numpy as np
import pytest

from linkshift.detector import TransitionRecord
from linkshift.entropy import Classification, Monotone
from linkshift.scaling import (
    DegenerateTailError,
    TailDirection,
    fit_lognormal,
    fit_powerlaw,
    fit_powerlaw_mle,
    top_tail,
)


def record(u, link=("A", "B"), year=2000):
    cls = Classification(u < 0, u < 0, u > 0, False, Monotone.NON_MONOTONE)
    return TransitionRecord(link, year, 0.2, 0.3, 0.4, u, u, u, cls)


class TestTopTail:
    def test_selects_most_negative_as_absolute_values(self):
        records = [record(v, link=(f"N{i}", "X")) for i, v in enumerate([-5, -3, -1, 2, 4])]
        tail = top_tail(records, 2, TailDirection.MOST_NEGATIVE)
        assert list(tail.values) == [5, 3]
        assert not tail.truncated

    def test_most_positive(self):
        records = [record(v, link=(f"N{i}", "X")) for i, v in enumerate([-5, -3, -1, 2, 4])]
        tail = top_tail(records, 2, TailDirection.MOST_POSITIVE)
        assert list(tail.values) == [4, 2]

    def test_k_one_returns_global_extremum(self):
        records = [record(v, link=(f"N{i}", "X")) for i, v in enumerate([-5, -3, 4])]
        tail = top_tail(records, 1)
        assert list(tail.values) == [5]

    def test_k_beyond_n_truncates_with_flag(self):
        records = [record(-1.0), record(-2.0, link=("C", "D"))]
        tail = top_tail(records, 10)
        assert tail.truncated
        assert len(tail.values) == 2

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(3)
        records = [record(v, link=(f"N{i:03d}", "X")) for i, v in enumerate(rng.normal(size=300))]
        tail = top_tail(records, 40)
        oracle = sorted((r.u for r in records))[:40]
        assert list(tail.values) == [abs(v) for v in oracle]

    def test_prefix_property(self):
        rng = np.random.default_rng(4)
        records = [record(v, link=(f"N{i:03d}", "X")) for i, v in enumerate(rng.normal(size=100))]
        for k in (1, 5, 20, 99):
            a = top_tail(records, k)
            b = top_tail(records, k + 1)
            assert b.values[:k] == a.values


class TestFitPowerlaw:
    def test_exact_power_law_recovered(self):
        ranks = np.arange(1, 10_001)
        values = 8.0 * ranks ** (-0.7)
        fit = fit_powerlaw(values)
        assert fit.exponent == pytest.approx(0.7, abs=1e-9)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert 2.0 ** fit.intercept == pytest.approx(8.0, rel=1e-9)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(5)
        values = np.sort(np.exp(rng.normal(size=500)))[::-1]
        base = fit_powerlaw(values)
        scaled = fit_powerlaw(17.0 * values)
        assert scaled.exponent == pytest.approx(base.exponent, rel=1e-12)
        assert scaled.r2 == pytest.approx(base.r2, rel=1e-12)
        assert scaled.intercept != base.intercept

    def test_non_positive_values_rejected(self):
        with pytest.raises(ValueError):
            fit_powerlaw([1.0] * 9 + [0.0])

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            fit_powerlaw([1.0] * 9)


class TestFitPowerlawMle:
    def test_recovers_exponent_on_sampled_data(self):
        rng = np.random.default_rng(6)
        alpha = 2.5
        # inverse-CDF sampling of a continuous Pareto with xmin = 1
        xs = (1.0 - rng.random(50_000)) ** (-1.0 / (alpha - 1.0))
        fit = fit_powerlaw_mle(xs)
        assert fit.alpha == pytest.approx(alpha, abs=0.05)

    def test_degenerate_values(self):
        with pytest.raises(DegenerateTailError):
            fit_powerlaw_mle([2.0] * 100)


class TestFitLognormal:
    def test_recovers_parameters(self):
        rng = np.random.default_rng(7)
        sample = np.exp(rng.normal(0.0, 1.0, 10_000))
        fit = fit_lognormal(sample)
        assert fit.mu == pytest.approx(0.0, abs=0.05)
        assert fit.sigma == pytest.approx(1.0, abs=0.05)
        assert fit.quantile_r2 > 0.99

    def test_all_equal_is_degenerate(self):
        with pytest.raises(DegenerateTailError):
            fit_lognormal([3.0] * 100)

    def test_power_law_tail_comparison(self):
        ranks = np.arange(1, 1001)
        values = 5.0 * ranks ** (-0.7)
        pl = fit_powerlaw(values)
        ln = fit_lognormal(values)
        assert pl.r2 == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= ln.quantile_r2 <= 1.0

    def test_non_positive_rejected(self):
        with pytest.raises(ValueError):
            fit_lognormal([1.0] * 20 + [-1.0])
