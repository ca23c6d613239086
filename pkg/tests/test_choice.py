import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from fastcharge.choice import (
    NO_CHARGE,
    Alternative,
    ChoiceParams,
    PriceTermMode,
    build_choice_set,
    expected_charge_minutes,
    expected_wait,
    mnl_probabilities,
    price_term,
    sample_choice,
    softmax,
    utility,
)
from fastcharge.domain import MobilityParams, Point, StationSpec

# softmax of (-11.3, -16.8, -50) evaluated at 40 digits with mpmath
P_REF = np.array([0.99592986228410385721, 0.004070137715896127262, 1.5525024883532000682e-17])
PARAMS = ChoiceParams()


def alts3():
    return [
        Alternative("s1", price_term=3, detour=1, wait=0),
        Alternative("s2", price_term=2, detour=2, wait=5),
        Alternative(NO_CHARGE),
    ]


def stations(*locs):
    return [StationSpec(f"s{i}", Point(*loc), 2, 5.0) for i, loc in enumerate(locs)]


class TestChoiceSet:
    def test_zero_soc_is_empty(self):
        assert build_choice_set(Point(0, 0), Point(10, 0), 0.0, stations((5, 3)), MobilityParams()) == []

    def test_included_and_excluded(self):
        got = build_choice_set(Point(0, 0), Point(10, 0), 0.5, stations((5, 3), (5, 8)), MobilityParams())
        assert got == ["s0"]

    def test_reachability_bound(self):
        # 8 miles away needs soc >= 0.04 at 200 mi range
        sts = stations((5, 3))
        assert build_choice_set(Point(0, 0), Point(10, 0), 0.039, sts, MobilityParams()) == []
        assert build_choice_set(Point(0, 0), Point(10, 0), 0.04, sts, MobilityParams()) == ["s0"]

    @given(
        st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=8),
        st.floats(0, 1),
        st.floats(0, 1),
        st.floats(1, 30),
        st.floats(0, 20),
    )
    def test_monotone_in_soc_and_detour(self, locs, soc, dsoc, dmax, ddet):
        sts = stations(*locs)
        origin, dest = Point(-20, 0), Point(20, 5)
        small = set(build_choice_set(origin, dest, soc, sts, MobilityParams(detour_max=dmax)))
        big = set(build_choice_set(origin, dest, min(1.0, soc + dsoc), sts, MobilityParams(detour_max=dmax + ddet)))
        assert small <= big


class TestUtility:
    @pytest.mark.parametrize(
        "alt, expected",
        [
            (Alternative("s", 0, 0, 0), 0.0),
            (Alternative("s", 3, 1, 0), -11.3),
            (Alternative("s", 2, 2, 5), -16.8),
            (Alternative(NO_CHARGE), -50.0),
        ],
    )
    def test_values(self, alt, expected):
        assert utility(alt, PARAMS) == pytest.approx(expected, abs=1e-12)

    def test_coefficients_must_be_negative(self):
        with pytest.raises(ValueError):
            ChoiceParams(beta_wait=0.5)


class TestProbabilities:
    def test_equal_utilities(self):
        p = mnl_probabilities([Alternative("a"), Alternative("b"), Alternative("c")], PARAMS)
        np.testing.assert_allclose(p, [1 / 3] * 3, rtol=1e-15)

    def test_reference_case(self):
        p = mnl_probabilities(alts3(), PARAMS)
        np.testing.assert_allclose(p, P_REF, rtol=1e-12)

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=12), st.floats(-1e3, 1e3))
    def test_simplex_and_shift_invariance(self, u, c):
        u = np.array(u)
        p = softmax(u)
        assert np.all(p >= 0)
        assert abs(p.sum() - 1) < 1e-12
        np.testing.assert_allclose(softmax(u + c), p, atol=1e-12)


class TestSampling:
    def test_single_alternative(self, rng):
        only = Alternative(NO_CHARGE)
        assert all(sample_choice([only], PARAMS, rng) is only for _ in range(20))

    def test_determinism(self):
        a = [sample_choice(alts3(), PARAMS, np.random.default_rng(7)).station_id for _ in range(5)]
        assert len(set(a)) == 1

    def test_inverse_cdf_order(self):
        class Fixed:
            def __init__(self, u):
                self.u = u

            def random(self):
                return self.u

        alts = [Alternative("a"), Alternative("b")]
        assert sample_choice(alts, PARAMS, Fixed(0.49)).station_id == "a"
        assert sample_choice(alts, PARAMS, Fixed(0.51)).station_id == "b"

    def test_chi_square_goodness_of_fit(self):
        rng = np.random.default_rng(99)
        alts = [Alternative("a", 1, 0, 0), Alternative("b", 1, 0.2, 0), Alternative("c", 1, 0, 1.5), Alternative(NO_CHARGE, 0, 0, 0)]
        params = ChoiceParams(no_charge_utility=-4.0)
        p = mnl_probabilities(alts, params)
        n = 100_000
        idx = {a.station_id: k for k, a in enumerate(alts)}
        counts = np.zeros(len(alts))
        for _ in range(n):
            counts[idx[sample_choice(alts, params, rng).station_id]] += 1
        _, pvalue = stats.chisquare(counts, p * n)
        assert pvalue > 0.001


class TestWait:
    def test_free_charger(self):
        assert expected_wait(5, 1, 2, 20.0) == 0.0

    def test_formula(self):
        assert expected_wait(4, 2, 2, 20.0) == 40.0

    def test_empty_queue_all_busy(self):
        assert expected_wait(0, 2, 2, 20.0) == 0.0


def test_price_term_modes():
    assert price_term(6.0, 30.0, ChoiceParams(price_term_mode="payment")) == 3.0
    assert price_term(6.0, 30.0, ChoiceParams(price_term_mode=PriceTermMode.HOURLY_RATE)) == 6.0
    assert ChoiceParams().price_term_mode is PriceTermMode.HOURLY_RATE


def test_expected_charge_minutes():
    # 64 miles short of destination at 3.2 mi/min, plus the 10 minute mean extra
    m = expected_charge_minutes(Point(0, 0), Point(64, 0), 0.0, MobilityParams(), 10.0)
    assert m == pytest.approx(30.0)
