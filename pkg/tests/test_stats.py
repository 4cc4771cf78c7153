import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linlam import enumerate as E
from linlam import stats as ST
from linlam.stats import DistributionTable

tables = st.dictionaries(st.integers(0, 12), st.integers(1, 50), min_size=1, max_size=8).map(
    lambda c: DistributionTable(7, c))


class TestMoments:
    def test_point_mass(self):
        d = DistributionTable(3, {2: 5})
        assert d.mean == 2 and d.variance == 0
        assert d.factorial_moment(2) == 2 and d.factorial_moment(3) == 0

    @given(tables)
    def test_second_factorial_moment(self, d):
        assert d.factorial_moment(2) == d.power_moment(2) - d.power_moment(1)

    @given(tables, st.integers(1, 6))
    def test_stirling_conversion(self, d, r):
        power, fact = ST.moments(d, r)
        assert power == d.power_moment(r) and fact == d.factorial_moment(r)

    def test_stirling_numbers(self):
        assert [ST.stirling2(4, k) for k in range(5)] == [0, 1, 7, 6, 1]

    @pytest.mark.parametrize("r", range(1, 6))
    def test_poisson_factorial_moments_are_one(self, r):
        # mass proportional to 1/k! reproduces Poisson(1) factorial moments up to truncation error
        K = 40
        top = math.factorial(K)
        d = DistributionTable(1, {k: top // math.factorial(k) for k in range(K + 1)})
        assert float(d.factorial_moment(r)) == pytest.approx(1, rel=1e-12)

    def test_truncated_table_has_no_moments(self):
        d = DistributionTable(4, {0: 1}, tail=2)
        with pytest.raises(ST.StatsError):
            d.mean
        assert d.probability(0) == Fraction(1, 3)

    def test_negative_counts_rejected(self):
        with pytest.raises(ST.StatsError):
            DistributionTable(1, {0: -1})

    def test_bad_r(self):
        with pytest.raises(ST.StatsError):
            ST.moments(DistributionTable(1, {0: 1}), 0)


class TestDistances:
    def test_poisson_table_near_zero(self):
        K = 40
        top = math.factorial(K)
        d = DistributionTable(1, {k: top // math.factorial(k) for k in range(K + 1)})
        assert ST.tv_poisson(d) < 1e-12

    def test_point_mass_tv(self):
        # point mass at 0 vs Poisson(1): TV = 1 - e^-1
        assert ST.tv_poisson(DistributionTable(1, {0: 1})) == pytest.approx(1 - math.exp(-1))

    def test_tail_counts_in_full(self):
        a = ST.tv_poisson(DistributionTable(1, {0: 1, 1: 1}))
        b = ST.tv_poisson(DistributionTable(1, {0: 1, 1: 1}, tail=1))
        assert b > a

    def test_zero_variance(self):
        with pytest.raises(ST.StatsError):
            ST.kolmogorov_gaussian(DistributionTable(1, {3: 4}))

    def test_symmetric_two_point(self):
        # CDF jumps from 0 to 1/2 at x = -1 where Phi = 0.1587
        d = DistributionTable(1, {0: 1, 2: 1})
        assert ST.kolmogorov_gaussian(d) == pytest.approx(0.5 - ST.normal_cdf(-1.0))

    def test_dispatch(self):
        d = DistributionTable(1, {0: 1, 2: 1})
        assert ST.distance(d, "gaussian") == ST.kolmogorov_gaussian(d)
        with pytest.raises(ST.StatsError):
            ST.distance(d, "cauchy")


class TestCatalogued:
    def test_identity_small(self):
        assert ST.identity_distribution(2).counts == {1: 1}
        assert ST.identity_distribution(5).counts == {0: 2, 1: 2, 2: 1}

    def test_bridges_small(self):
        assert ST.bridge_distribution(5).counts == {0: 2, 1: 2, 2: 1}

    def test_freevars_small(self):
        assert ST.free_variable_distribution(3).counts == {2: 1}

    def test_unused_small(self):
        assert ST.unused_abstraction_distribution(4).counts == {2: 3}

    @pytest.mark.parametrize("n", [5, 8, 11, 14, 29, 50])
    def test_bridges_zero_and_one_equal(self, n):
        d = ST.bridge_distribution(n)
        assert d.counts[0] == d.counts[1]

    def test_bridge_factorial_moment_matches_table(self):
        for n in (8, 11, 20):
            d = ST.bridge_distribution(n, order_v=n + 1)
            for r in (1, 2, 3):
                assert ST.bridge_factorial_moment(n, r) == d.factorial_moment(r)

    def test_totals_are_class_counts(self):
        for n in (8, 11):
            assert ST.identity_distribution(n).total == sum(1 for _ in E.enumerate_class("linear_closed", n))

    def test_beyond_truncation(self):
        from linlam import series as S
        with pytest.raises(ST.StatsError):
            ST.distribution_from_series(S.series_catalog("T", 5, 5), 5)


class TestAsymptotics:
    def test_involutions_odd_vanish(self):
        assert ST.asymptotic_eval("involutions", 27) == 0
        assert ST.exact_coefficient("involutions", 27) == 0

    def test_involutions_error_decreases(self):
        assert ST.relative_error("involutions", 100) < ST.relative_error("involutions", 26) < 0.1

    def test_exp_cubic(self):
        assert ST.relative_error("exp_cubic", 100) < ST.relative_error("exp_cubic", 25)
        assert ST.relative_error("exp_cubic", 300, 2) < ST.relative_error("exp_cubic", 30, 2)

    def test_exp_cubic_oracle(self):
        # [z^3] exp(z^3/3 + z) = 1/3! + 1/3
        assert ST.exact_coefficient("exp_cubic", 3) == Fraction(1, 6) + Fraction(1, 3)

    def test_exp_cubic_quadratic_corrected_vs_printed(self):
        for n in (30, 100, 300):
            assert ST.relative_error("exp_cubic_quadratic", n) < 0.05
            assert ST.relative_error("exp_cubic_quadratic", n, as_printed=True) > 0.9

    def test_closed_term_growth(self):
        assert ST.relative_error("closed_term_growth", 40) == pytest.approx(0.0071578, abs=1e-6)

    def test_pgfs_at_one(self):
        assert ST.asymptotic_eval("disco13_pgf", 60, 1.0) == 1.0
        assert ST.asymptotic_eval("disco23_pgf", 60, 1.0) == 1.0

    def test_unused_lower_bound_below_mean(self):
        for n in (10, 40, 90):
            assert ST.asymptotic_eval("unused_lower_bound", n) <= ST.unused_abstraction_distribution(n).mean

    def test_unknown(self):
        with pytest.raises(ST.StatsError):
            ST.asymptotic_eval("nope", 5)
        with pytest.raises(ST.StatsError):
            ST.asymptotic_eval("involutions", 1)


class TestTrends:
    def test_growth(self):
        rep = ST.schema_conclusion_check("growth_constant")
        assert rep.passed
        assert rep.series["ratio"][1] == rep.series["ratio"][2] == pytest.approx(5 / 6)
        assert rep.terminal["gap"] == pytest.approx(0.00679, abs=1e-5)

    def test_bridgeless(self):
        rep = ST.schema_conclusion_check("bridgeless_fraction")
        assert rep.passed and rep.terminal["gap"] == pytest.approx(0.00285, abs=1e-5)

    def test_identity_short(self):
        rep = ST.schema_conclusion_check("identity_poisson", 41)
        assert rep.series and rep.checks

    def test_connected(self):
        rep = ST.schema_conclusion_check("connected_vs_disconnected")
        assert rep.passed and rep.terminal["H"] == 60

    def test_unused_short(self):
        assert ST.schema_conclusion_check("unused_gaussian", 80).passed

    def test_unknown_target(self):
        with pytest.raises(ST.StatsError):
            ST.schema_conclusion_check("nope")

    def test_report_dict(self):
        d = ST.schema_conclusion_check("growth_constant", 10).to_dict()
        assert set(d) == {"target", "passed", "series", "terminal", "checks", "notes"}
