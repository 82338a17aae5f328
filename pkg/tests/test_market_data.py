import datetime as dt

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from fearconnect.exceptions import EmptyInputError, FormatError, SchemaError
from fearconnect.market_data import (
    IndicatorKind,
    RateCurveDay,
    Right,
    curve_for_date,
    load_indicators,
    load_market_caps,
    load_option_chains,
    load_rate_curves,
    rate_for,
    write_option_chains,
)

HEADER = "date,expiry,strike,right,bid,ask,underlier\n"


def test_well_formed_file_gives_one_chain(write_csv):
    path = write_csv("chains.csv", HEADER
                     + "2020-01-02,2020-02-01,100,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,P,0.9,1.1,JPM\n"
                     + "2020-01-02,2020-02-01,105,C,0.5,0.6,JPM\n")
    result = load_option_chains(path)
    assert len(result.chains) == 1
    chain = result.chains[0]
    assert chain.underlier == "JPM"
    assert chain.n_quotes == 3
    assert result.report.dropped_rows == 0
    assert result.report.kept_rows == 3


def test_bid_above_ask_is_dropped(write_csv):
    path = write_csv("chains.csv", HEADER
                     + "2020-01-02,2020-02-01,100,C,1.5,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,P,0.9,1.1,JPM\n")
    result = load_option_chains(path)
    assert result.report.reasons == {"bid_above_ask": 1}
    assert result.report.dropped_rows + result.report.kept_rows == result.report.total_rows


def test_two_dates_give_chains_in_date_order(write_csv):
    path = write_csv("chains.csv", HEADER
                     + "2020-01-03,2020-02-01,100,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,C,1.0,1.2,JPM\n")
    result = load_option_chains(path)
    assert [c.quote_date for c in result.chains] == [dt.date(2020, 1, 2), dt.date(2020, 1, 3)]


def test_drop_reasons_are_counted(write_csv):
    path = write_csv("chains.csv", HEADER
                     + "2020-01-02,2020-02-01,100,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2019-12-01,100,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,-5,C,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,X,1.0,1.2,JPM\n"
                     + "2020-01-02,2020-02-01,100,P,-1.0,1.2,JPM\n")
    report = load_option_chains(path).report
    assert report.reasons == {"duplicate": 1, "expired": 1, "non_positive_strike": 1,
                              "unparseable": 1, "negative_bid": 1}
    assert report.kept_rows == 1


def test_missing_column_raises_schema_error(write_csv):
    path = write_csv("chains.csv", "date,expiry,strike,right,bid\n2020-01-02,2020-02-01,100,C,1.0\n")
    with pytest.raises(SchemaError) as info:
        load_option_chains(path)
    assert info.value.details["missing"] == ["ask"]


def test_no_parseable_rows_raises_empty_input(write_csv):
    path = write_csv("chains.csv", HEADER + "kein-datum,2020-02-01,100,C,1.0,1.2,JPM\n")
    with pytest.raises(EmptyInputError):
        load_option_chains(path)


def test_schema_mapping_and_round_trip(write_csv, tmp_path):
    path = write_csv("chains.csv", "Datum,Verfall,K,Art,Geld,Brief\n"
                     "2020-01-02,2020-02-01,100,call,1.0,1.2\n"
                     "2020-01-02,2020-02-01,95,put,0.7,0.8\n")
    schema = {"date": "Datum", "expiry": "Verfall", "strike": "K", "right": "Art", "bid": "Geld", "ask": "Brief"}
    result = load_option_chains(path, schema=schema, default_underlier="BAC")
    assert result.chains[0].underlier == "BAC"
    assert result.chains[0].slices[0].strikes(Right.PUT) == [95.0]

    out = str(tmp_path / "out.csv")
    write_option_chains(result.chains, out)
    assert load_option_chains(out).chains == result.chains


def test_rate_for_examples():
    assert rate_for(RateCurveDay(dt.date(2020, 1, 2), ((30, 0.02),)), 30) == 0.02
    curve = RateCurveDay(dt.date(2020, 1, 2), ((10, 0.01), (30, 0.03)))
    assert rate_for(curve, 20) == pytest.approx(0.02)
    assert rate_for(curve, 60) == pytest.approx(0.03)
    assert rate_for(curve, 0) == pytest.approx(0.01)


@given(st.integers(min_value=0, max_value=2000))
def test_rate_for_stays_within_curve_range(days):
    curve = RateCurveDay(dt.date(2020, 1, 2), ((7, 0.01), (30, 0.015), (365, 0.03)))
    assert 0.01 <= rate_for(curve, days) <= 0.03


def test_rate_curves_and_date_lookup(write_csv):
    path = write_csv("rates.csv", "date,tenor_days,rate\n"
                     "2020-01-02,30,0.02\n2020-01-02,7,0.01\n2020-02-03,30,0.025\n")
    curves = load_rate_curves(path)
    assert list(curves) == [dt.date(2020, 1, 2), dt.date(2020, 2, 3)]
    assert curves[dt.date(2020, 1, 2)].tenors == ((7, 0.01), (30, 0.02))
    assert curve_for_date(curves, dt.date(2020, 1, 15)).quote_date == dt.date(2020, 1, 2)
    with pytest.raises(EmptyInputError):
        curve_for_date(curves, dt.date(2019, 12, 31))


def test_duplicate_tenor_is_format_error(write_csv):
    path = write_csv("rates.csv", "date,tenor_days,rate\n2020-01-02,30,0.02\n2020-01-02,30,0.03\n")
    with pytest.raises(FormatError):
        load_rate_curves(path)


def test_market_caps(write_csv):
    caps = load_market_caps(write_csv("caps.csv", "name,avg_mktcap\nJPM,165.046\nBAC,155.131\n"))
    assert caps.entries == {"JPM": 165.046, "BAC": 155.131}
    with pytest.raises(FormatError):
        load_market_caps(write_csv("bad.csv", "name,avg_mktcap\nJPM,0\n"))


def test_indicators_kinds_and_gaps(write_csv):
    path = write_csv("ind.csv", "month,ADS,NBER\n2007-11,0.5,0\n2007-12,,1\n2008-01-01,-1.2,1\n")
    series = {s.name: s for s in load_indicators(path)}
    assert series["NBER"].kind is IndicatorKind.BINARY
    assert series["ADS"].kind is IndicatorKind.CONTINUOUS
    assert series["ADS"].gaps == [pd.Period("2007-12", freq="M")]
    values = series["ADS"].to_series()
    assert values.index[-1] == pd.Period("2008-01", freq="M")
    assert np.isnan(values.iloc[1])


def test_unparseable_month_is_format_error(write_csv):
    with pytest.raises(FormatError):
        load_indicators(write_csv("ind.csv", "month,ADS\nNovember,0.5\n"))
