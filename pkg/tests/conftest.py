"""Gemeinsame Fixtures der Testsuite."""

import datetime as dt

import numpy as np
import pytest

from fearconnect.fixtures import synthetic_chain
from fearconnect.market_data import RateCurveDay
from fearconnect.var_engine import VarModel

QUOTE_DATE = dt.date(2020, 1, 2)


def make_curve(rate: float = 0.0, quote_date: dt.date = QUOTE_DATE) -> RateCurveDay:
    return RateCurveDay(quote_date=quote_date, tenors=((1, rate), (365, rate)))


def bs_chain(step: float = 1.0, sigma: float = 0.2, r: float = 0.0, days=(23, 37),
             low: float = 50.0, high: float = 150.0, underlier: str = "BS",
             quote_date: dt.date = QUOTE_DATE, skew: float = 0.0):
    """Black-Scholes-Kette mit festem Strike-Gitter und Verfällen in `days` Tagen."""
    strikes = np.arange(low, high + step / 2, step)
    expiries = [quote_date + dt.timedelta(days=d) for d in days]
    return synthetic_chain(underlier, quote_date, 100.0, sigma, r, expiries, strikes, skew=skew)


@pytest.fixture
def flat_curve():
    return make_curve(0.0)


@pytest.fixture
def bivariate_model():
    return VarModel.from_coefficients(
        Phi=[[0.5, 0.2], [0.1, 0.3]],
        Sigma=[[1.0, 0.3], [0.3, 1.0]],
        names=("A", "B"),
    )


@pytest.fixture
def write_csv(tmp_path):
    """Schreibt Text in eine Datei unter tmp_path und liefert den Pfad."""
    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
