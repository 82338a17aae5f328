import datetime as dt
import math

import pytest
from numpy.testing import assert_allclose

from fearconnect.exceptions import (
    InsufficientChainError,
    NegativeVarianceError,
    NonPositiveVarianceError,
    NoStripError,
    ParityError,
)
from fearconnect.vol_index import (
    ExpirySlice,
    Flavor,
    Side,
    VarianceResult,
    build_slice,
    compute_forward,
    day_indexes,
    decomposition_gap,
    interpolate_index,
    select_expiries,
    strike_gaps,
    usable_mids,
    variance_strip,
)
from tests.conftest import QUOTE_DATE, bs_chain, make_curve


def _days(chain_slice):
    return (chain_slice.expiry - QUOTE_DATE).days


def _variance(sigma2, n_days):
    return VarianceResult(sigma2=sigma2, side=Side.ALL, n_strikes=10, n_days=n_days, T=n_days / 365.0)


class TestStrikeGaps:
    def test_uniform_grid(self):
        assert_allclose(strike_gaps([90, 100, 110]), [10, 10, 10])

    def test_interior_and_boundary_rules(self):
        assert_allclose(strike_gaps([90, 100, 120]), [10, 15, 20])

    def test_single_strike_is_error(self):
        with pytest.raises(NoStripError):
            strike_gaps([100])


class TestForward:
    def test_zero_parity_gap(self):
        forward, k0 = compute_forward({95: 7.0, 100: 3.0, 105: 1.0}, {95: 1.5, 100: 3.0, 105: 6.0}, 0.05, 0.1)
        assert forward == pytest.approx(100.0)
        assert k0 == 100.0

    def test_floor_strike_selection(self):
        forward, k0 = compute_forward({95: 7.5, 100: 4.0, 105: 1.2}, {95: 1.0, 100: 2.0, 105: 4.5}, 0.0, 0.1)
        assert forward == pytest.approx(102.0)
        assert k0 == 100.0

    def test_tie_takes_smallest_strike(self):
        forward, k0 = compute_forward({95: 3.0, 100: 2.0}, {95: 2.0, 100: 3.0}, 0.0, 0.1)
        assert forward == pytest.approx(96.0)
        assert k0 == 95.0

    def test_without_common_strike(self):
        with pytest.raises(ParityError):
            compute_forward({100: 1.0}, {95: 1.0}, 0.0, 0.1)

    def test_black_scholes_forward(self):
        r, n_days = 0.01, 30
        chain = bs_chain(r=r, days=(n_days, 60))
        calls, puts = usable_mids(chain.slices[0])
        T = n_days / 365.0
        forward, k0 = compute_forward(calls, puts, r, T)
        assert forward == pytest.approx(100.0 * math.exp(r * T), rel=1e-3)
        assert k0 <= forward


class TestSelectExpiries:
    def test_bracketing_target(self):
        near, nxt = select_expiries(bs_chain(days=(20, 45, 80)))
        assert (_days(near), _days(nxt)) == (20, 45)

    def test_two_earliest_when_none_below_target(self):
        near, nxt = select_expiries(bs_chain(days=(35, 63, 91)))
        assert (_days(near), _days(nxt)) == (35, 63)

    def test_two_latest_when_all_below_target(self):
        near, nxt = select_expiries(bs_chain(days=(10, 20, 25)))
        assert (_days(near), _days(nxt)) == (20, 25)

    def test_short_expiries_are_skipped(self):
        near, nxt = select_expiries(bs_chain(days=(3, 20, 45)), min_days=7)
        assert (_days(near), _days(nxt)) == (20, 45)

    def test_single_expiry_is_error(self):
        with pytest.raises(InsufficientChainError):
            select_expiries(bs_chain(days=(30,)))


class TestVarianceStrip:
    def test_single_strike_at_forward(self):
        T = 30 / 365.0
        expiry_slice = ExpirySlice(
            expiry=QUOTE_DATE + dt.timedelta(days=30), n_days=30, T=T, r=0.0, F=100.0, K0=100.0,
            side=Side.ALL, strikes=(100.0,), quotes=(1.0,), gaps=(5.0,),
        )
        result = variance_strip(expiry_slice)
        assert result.sigma2 == pytest.approx((2 / T) * (5 / 10000) * 1.0)
        assert result.sigma2 == pytest.approx(0.01217, abs=1e-5)

    def test_forward_correction_can_make_variance_non_positive(self):
        expiry_slice = ExpirySlice(
            expiry=QUOTE_DATE + dt.timedelta(days=30), n_days=30, T=30 / 365.0, r=0.0, F=130.0, K0=100.0,
            side=Side.ALL, strikes=(100.0,), quotes=(0.01,), gaps=(5.0,),
        )
        with pytest.raises(NonPositiveVarianceError):
            variance_strip(expiry_slice)

    def test_flat_black_scholes_variance(self, flat_curve):
        chain = bs_chain(sigma=0.2, days=(30, 60))
        expiry_slice = build_slice(chain.slices[0], QUOTE_DATE, flat_curve, Side.ALL)
        assert variance_strip(expiry_slice).sigma2 == pytest.approx(0.04, rel=0.02)

    def test_side_strips(self, flat_curve):
        chain = bs_chain(days=(30, 60))
        calls = build_slice(chain.slices[0], QUOTE_DATE, flat_curve, Side.CALLS_ONLY)
        puts = build_slice(chain.slices[0], QUOTE_DATE, flat_curve, Side.PUTS_ONLY)
        assert min(calls.strikes) == calls.K0
        assert max(puts.strikes) == puts.K0

    def test_side_variances_differ_only_by_reference_strike_terms(self):
        curve = make_curve(0.01)
        chain = bs_chain(days=(30, 60), r=0.01, skew=0.3)
        slices = {side: build_slice(chain.slices[0], QUOTE_DATE, curve, side) for side in Side}
        sigma2 = {side: variance_strip(s).sigma2 for side, s in slices.items()}
        s_all = slices[Side.ALL]
        expected = (2 * math.exp(s_all.r * s_all.T) / s_all.T) * (
            s_all.k0_term - slices[Side.CALLS_ONLY].k0_term - slices[Side.PUTS_ONLY].k0_term
        ) + (s_all.F / s_all.K0 - 1) ** 2 / s_all.T
        assert sigma2[Side.ALL] - sigma2[Side.CALLS_ONLY] - sigma2[Side.PUTS_ONLY] == pytest.approx(
            expected, abs=1e-12)


class TestInterpolateIndex:
    @pytest.mark.parametrize("n1,n2", [(23, 37), (9, 65), (29, 31)])
    def test_equal_variances(self, n1, n2):
        assert interpolate_index(_variance(0.04, n1), _variance(0.04, n2)) == pytest.approx(20.0)

    def test_near_expiry_on_target(self):
        assert interpolate_index(_variance(0.09, 30), _variance(0.5, 45)) == pytest.approx(30.0)

    def test_hand_computed_value(self):
        # Gewichte je 0.5; (365/30)(23/365·0.04 + 37/365·0.09)/2 = 2.125/30
        value = interpolate_index(_variance(0.04, 23), _variance(0.09, 37))
        assert value == pytest.approx(100 * math.sqrt(2.125 / 30))

    def test_expiries_must_be_ordered(self):
        with pytest.raises(ValueError):
            interpolate_index(_variance(0.04, 37), _variance(0.04, 23))

    def test_negative_radicand(self):
        with pytest.raises(NegativeVarianceError) as info:
            interpolate_index(_variance(-1.0, 23), _variance(0.01, 37))
        assert info.value.details["near"]["sigma2"] == -1.0


class TestDayIndexes:
    def test_flat_chain_gives_sigma(self, flat_curve):
        day = day_indexes(bs_chain(step=1.0), flat_curve)
        assert day.values[Flavor.AGGREGATE] == pytest.approx(20.0, abs=1.0)
        assert day.values[Flavor.POSITIVE] > 0
        assert day.values[Flavor.NEGATIVE] > 0

    def test_finer_grid_reduces_error(self, flat_curve):
        coarse = day_indexes(bs_chain(step=10.0), flat_curve).values[Flavor.AGGREGATE]
        fine = day_indexes(bs_chain(step=1.0), flat_curve).values[Flavor.AGGREGATE]
        assert abs(fine - 20.0) < abs(coarse - 20.0)

    def test_decomposition_gap_is_exact(self):
        day = day_indexes(bs_chain(r=0.01, skew=0.3), make_curve(0.01))
        v = day.values
        expected = v[Flavor.AGGREGATE] ** 2 - v[Flavor.POSITIVE] ** 2 - v[Flavor.NEGATIVE] ** 2
        assert decomposition_gap(day) == pytest.approx(expected, abs=1e-8)

    def test_skew_makes_negative_component_dominate(self, flat_curve):
        v = day_indexes(bs_chain(skew=0.5), flat_curve).values
        assert v[Flavor.NEGATIVE] > v[Flavor.POSITIVE]

    def test_flavors_share_forward_and_reference_strike(self, flat_curve):
        day = day_indexes(bs_chain(skew=0.3), flat_curve)
        for k in range(2):
            forwards = {day.slices[f][k].F for f in Flavor}
            strikes = {day.slices[f][k].K0 for f in Flavor}
            assert len(forwards) == 1 and len(strikes) == 1
