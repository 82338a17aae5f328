"""
Synthetische Testdaten für fearconnect
Black-Scholes-Preise europäischer Optionen, synthetische Optionsketten und
ein vollständiger Beispieldatensatz (Ketten, Zinsen, Marktkapitalisierungen,
Indikatoren und lauffähige Konfiguration).

Die Volatilitäten der Basiswerte folgen einem latenten VAR(1) in
Logarithmen, die Indexpanels sind daher miteinander verbunden.
"""

import datetime as dt
import logging
import os
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import yaml
from scipy.stats import norm

from fearconnect.config_defaults import create_default_config
from fearconnect.market_data import (
    ChainSlice,
    OptionChainDay,
    OptionQuote,
    Right,
    write_option_chains,
)
from fearconnect.var_engine import VarModel, simulate_var

logger = logging.getLogger(__name__)

DEFAULT_NAMES = ("AAA", "BBB", "CCC")
# Quotierungen unter diesem Mittelkurs erhalten einen Geldkurs von 0
MIN_TICK = 0.001


def black_scholes_price(S: float, K, T: float, r: float, sigma, right: Right):
    """
    Black-Scholes-Preis einer europäischen Option ohne Dividenden.

    Args:
        S: Kurs des Basiswerts
        K: Strike (Skalar oder Array)
        T: Laufzeit in Jahren
        r: Zins
        sigma: Volatilität (Skalar oder Array wie K)
        right: Call oder Put

    Returns:
        Preis(e) im Format von K
    """
    K = np.asarray(K, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    sqrt_t = np.sqrt(T)
    d1 = (np.log(S / K) + (r + 0.5 * sigma ** 2) * T) / (sigma * sqrt_t)
    d2 = d1 - sigma * sqrt_t
    discount = np.exp(-r * T)
    if right is Right.CALL:
        return S * norm.cdf(d1) - K * discount * norm.cdf(d2)
    return K * discount * norm.cdf(-d2) - S * norm.cdf(-d1)


def smile_vol(sigma: float, K, S: float, skew: float = 0.0):
    """Lineare Schiefe in log-Moneyness: σ(K) = σ·(1 − skew·ln(K/S)), mindestens 1 %."""
    return np.clip(sigma * (1.0 - skew * np.log(np.asarray(K, dtype=float) / S)), 0.01, None)


def synthetic_chain(underlier: str, quote_date: dt.date, spot: float, sigma: float, r: float,
                    expiries: Sequence[dt.date], strikes: Sequence[float], spread: float = 0.0,
                    skew: float = 0.0) -> OptionChainDay:
    """
    Optionskette aus Black-Scholes-Preisen.

    Geld- und Briefkurs liegen symmetrisch um den Modellpreis
    (relative Spanne spread); Preise unter MIN_TICK erhalten Geldkurs 0.

    Returns:
        OptionChainDay
    """
    strikes = np.asarray(sorted(strikes), dtype=float)
    slices = []
    for expiry in sorted(expiries):
        T = (expiry - quote_date).days / 365.0
        vols = smile_vol(sigma, strikes, spot, skew)
        quotes = []
        for right in (Right.CALL, Right.PUT):
            prices = black_scholes_price(spot, strikes, T, r, vols, right)
            for strike, price in zip(strikes, prices):
                price = float(max(price, 0.0))
                if price < MIN_TICK:
                    bid, ask = 0.0, MIN_TICK
                else:
                    bid, ask = price * (1 - 0.5 * spread), price * (1 + 0.5 * spread)
                quotes.append(OptionQuote(strike=float(strike), right=right, bid=bid, ask=ask,
                                          expiry=expiry, quote_date=quote_date))
        slices.append(ChainSlice(expiry=expiry, quotes=tuple(quotes)))
    return OptionChainDay(underlier=underlier, quote_date=quote_date, slices=tuple(slices))


def expiry_schedule(first: dt.date, last: dt.date, every_days: int = 28) -> List[dt.date]:
    """Verfallstermine im festen Abstand, ab dem ersten Freitag nach first."""
    start = first + dt.timedelta(days=(4 - first.weekday()) % 7 + 7)
    dates = []
    current = start
    while current <= last + dt.timedelta(days=4 * every_days):
        dates.append(current)
        current += dt.timedelta(days=every_days)
    return dates


def latent_volatilities(names: Sequence[str], n_days: int, seed: int,
                        base: float = 0.25, persistence: float = 0.97,
                        spillover: float = 0.01) -> np.ndarray:
    """
    Tagesvolatilitäten aus einem latenten VAR(1) der Log-Volatilitäten.

    Returns:
        np.ndarray: n_days × N, positive Volatilitäten
    """
    n = len(names)
    Phi = persistence * np.eye(n) + spillover * (np.ones((n, n)) - np.eye(n))
    Sigma = 0.0025 * (0.5 * np.eye(n) + 0.5 * np.ones((n, n)))
    model = VarModel.from_coefficients(Phi, Sigma, names=names)
    path = simulate_var(model, n_days, seed=seed)
    scale = np.linspace(0.9, 1.3, n)
    return base * scale * np.exp(path)


def generate_fixture(out_dir: str, names: Sequence[str] = DEFAULT_NAMES, n_days: int = 1000,
                     seed: int = 0, start: str = "2006-01-02", n_strikes: int = 41,
                     strike_spacing: float = 0.015, spread: float = 0.02, skew: float = 0.3,
                     config_overrides: Optional[Dict] = None) -> Dict[str, str]:
    """
    Schreibt einen vollständigen synthetischen Datensatz samt Konfiguration.

    Je Handelstag und Name werden die drei nächsten Verfälle quotiert. Das
    Strike-Gitter ist um den Tageskurs zentriert und hat den relativen
    Abstand strike_spacing.

    Args:
        out_dir: Zielverzeichnis
        names: Basiswerte
        n_days: Anzahl Handelstage
        seed: Startwert aller Zufallsgeneratoren
        start: Erster Handelstag (ISO)
        n_strikes: Anzahl Strikes je Verfall
        strike_spacing: Abstand der Strikes relativ zum Kurs
        spread: Relative Geld-Brief-Spanne
        skew: Schiefe der Volatilität in log-Moneyness
        config_overrides: {Abschnitt: {Schlüssel: Wert}} für die erzeugte Konfiguration

    Returns:
        dict: Pfade der geschriebenen Dateien (chains, rates, caps, indicators, config)
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    dates = [d.date() for d in pd.bdate_range(start=start, periods=n_days)]
    vols = latent_volatilities(names, n_days, seed)
    expiries = expiry_schedule(dates[0], dates[-1])
    rate = 0.02

    spots = 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=(n_days, len(names))), axis=0))
    chains = []
    for i, quote_date in enumerate(dates):
        upcoming = [e for e in expiries if e > quote_date][:3]
        for j, name in enumerate(names):
            spot = float(spots[i, j])
            strikes = np.round(spot * (1.0 + strike_spacing * (np.arange(n_strikes) - n_strikes // 2)), 2)
            strikes = np.unique(strikes[strikes > 0])
            chains.append(synthetic_chain(name, quote_date, spot, float(vols[i, j]), rate,
                                          upcoming, strikes, spread=spread, skew=skew))

    paths = {
        "chains": os.path.join(out_dir, "chains.csv"),
        "rates": os.path.join(out_dir, "rates.csv"),
        "caps": os.path.join(out_dir, "caps.csv"),
        "indicators": os.path.join(out_dir, "indicators.csv"),
        "config": os.path.join(out_dir, "fearconnect_config.yaml"),
    }
    write_option_chains(chains, paths["chains"])

    # Zinskurve zum ersten Handelstag jedes Monats
    month_starts = sorted({(d.year, d.month): d for d in reversed(dates)}.values())
    rate_rows = [
        {"date": d.isoformat(), "tenor_days": tenor, "rate": round(rate + 0.0001 * k + 0.00002 * tenor / 30, 6)}
        for k, d in enumerate(month_starts) for tenor in (7, 30, 90, 180, 365)
    ]
    pd.DataFrame(rate_rows).to_csv(paths["rates"], index=False)

    caps = rng.uniform(50.0, 200.0, size=len(names)).round(3)
    pd.DataFrame({"name": list(names), "avg_mktcap": caps}).to_csv(paths["caps"], index=False)

    _write_indicators(paths["indicators"], dates, vols, rng)
    _write_config(paths, n_days, len(names), config_overrides)
    logger.info(f"Synthetischer Datensatz mit {len(chains)} Ketten in {out_dir} geschrieben")
    return paths


def _write_indicators(path: str, dates: Sequence[dt.date], vols: np.ndarray, rng) -> None:
    months = pd.PeriodIndex([pd.Period(d, freq="M") for d in dates], freq="M")
    monthly_vol = pd.Series(vols.mean(axis=1), index=months).groupby(level=0).mean()
    n = len(monthly_vol)
    ads = -2.0 * (monthly_vol.to_numpy() - monthly_vol.mean()) / monthly_vol.std(ddof=0) * 0.3 \
        + rng.normal(0.0, 0.5, n)
    epu = 100.0 + 40.0 * (monthly_vol.to_numpy() / monthly_vol.mean() - 1.0) + rng.normal(0.0, 5.0, n)
    nber = np.zeros(n)
    nber[n // 3:n // 3 + max(n // 6, 3)] = 1.0
    frame = pd.DataFrame({
        "month": [str(m) for m in monthly_vol.index],
        "ADS": ads.round(6),
        "EPU": epu.round(6),
        "NBER": nber.astype(int),
    })
    frame.to_csv(path, index=False)


def _write_config(paths: Dict[str, str], n_days: int, n_names: int, overrides: Optional[Dict]) -> None:
    config = create_default_config()
    config["paths"].update({
        "chains": os.path.basename(paths["chains"]),
        "rates": os.path.basename(paths["rates"]),
        "caps": os.path.basename(paths["caps"]),
        "indicators": os.path.basename(paths["indicators"]),
        "output_dir": "output",
    })
    config["rolling"]["window"] = min(200, max(n_days // 3, 5 * n_names + 6))
    config["predictive"]["macro_targets"] = ["ADS", "NBER"]
    config["predictive"]["uncertainty_targets"] = ["EPU"]
    for section, values in (overrides or {}).items():
        config.setdefault(section, {}).update(values)
    with open(paths["config"], "w", encoding="utf-8") as file:
        yaml.safe_dump(config, file, default_flow_style=False, allow_unicode=True, sort_keys=False)
