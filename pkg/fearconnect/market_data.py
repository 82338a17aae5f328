"""
Marktdaten für fearconnect
Liest Optionsketten, Zinskurven, Marktkapitalisierungen und monatliche
Indikatoren aus CSV-Dateien, prüft sie und stellt sie als typisierte
Objekte bereit.

Alle Funktionen sind reine Funktionen über unveränderlichen Eingaben und
können gefahrlos aus mehreren Threads aufgerufen werden.
"""

import datetime as dt
import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fearconnect.exceptions import EmptyInputError, FormatError, SchemaError

logger = logging.getLogger(__name__)

REQUIRED_CHAIN_COLUMNS = ("date", "expiry", "strike", "right", "bid", "ask")


class Right(enum.Enum):
    CALL = "C"
    PUT = "P"

    @classmethod
    def parse(cls, value) -> "Right":
        """
        Wandelt übliche Schreibweisen ('C', 'call', 'Put', ...) in ein Right um

        Raises:
            ValueError: Bei unbekannter Schreibweise
        """
        text = str(value).strip().upper()
        if text in ("C", "CALL"):
            return cls.CALL
        if text in ("P", "PUT"):
            return cls.PUT
        raise ValueError(f"Unbekannte Optionsart: {value!r}")


class IndicatorKind(enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


@dataclass(frozen=True)
class OptionQuote:
    """Einzelne Optionsnotierung (Geld-/Briefkurs) für einen Strike."""

    strike: float
    right: Right
    bid: float
    ask: float
    expiry: dt.date
    quote_date: dt.date

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid + self.ask)

    def violation(self) -> Optional[str]:
        """
        Prüft die Invarianten der Notierung

        Returns:
            str: Grund der Verletzung oder None, wenn die Notierung gültig ist
        """
        if not np.isfinite(self.strike) or self.strike <= 0:
            return "non_positive_strike"
        if not (np.isfinite(self.bid) and np.isfinite(self.ask)) or self.bid < 0:
            return "negative_bid"
        if self.ask < self.bid:
            return "bid_above_ask"
        if self.expiry <= self.quote_date:
            return "expired"
        return None


@dataclass(frozen=True)
class ChainSlice:
    """Alle Notierungen eines Verfallstermins, nach (Art, Strike) sortiert."""

    expiry: dt.date
    quotes: Tuple[OptionQuote, ...]

    def strikes(self, right: Right) -> List[float]:
        return [q.strike for q in self.quotes if q.right is right]


@dataclass(frozen=True)
class OptionChainDay:
    """Alle Optionsnotierungen eines Basiswerts an einem Handelstag."""

    underlier: str
    quote_date: dt.date
    slices: Tuple[ChainSlice, ...]

    @property
    def n_quotes(self) -> int:
        return sum(len(s.quotes) for s in self.slices)


@dataclass(frozen=True)
class DropReport:
    """Zählt eingelesene, behaltene und verworfene Zeilen nach Grund."""

    total_rows: int
    kept_rows: int
    reasons: Dict[str, int] = field(default_factory=dict)

    @property
    def dropped_rows(self) -> int:
        return sum(self.reasons.values())

    def to_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "kept_rows": self.kept_rows,
            "dropped_rows": self.dropped_rows,
            "reasons": dict(sorted(self.reasons.items())),
        }


@dataclass(frozen=True)
class ChainLoadResult:
    chains: List[OptionChainDay]
    report: DropReport


@dataclass(frozen=True)
class RateCurveDay:
    """Zinskurve eines Tages: (Restlaufzeit in Tagen, annualisierter Zins)."""

    quote_date: dt.date
    tenors: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        if not self.tenors:
            raise EmptyInputError(f"Leere Zinskurve am {self.quote_date}")
        days = [d for d, _ in self.tenors]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise FormatError(f"Laufzeiten der Zinskurve vom {self.quote_date} nicht streng steigend",
                              {"date": self.quote_date.isoformat()})
        if not all(np.isfinite(r) for _, r in self.tenors):
            raise FormatError(f"Nicht-endlicher Zins in der Kurve vom {self.quote_date}",
                              {"date": self.quote_date.isoformat()})


@dataclass(frozen=True)
class MarketCapTable:
    """Durchschnittliche Marktkapitalisierung je Name (Milliarden)."""

    entries: Dict[str, float]

    def __post_init__(self):
        for name, cap in self.entries.items():
            if not np.isfinite(cap) or cap <= 0:
                raise FormatError(f"Marktkapitalisierung für {name} muss positiv sein",
                                  {"name": name, "cap": cap})


@dataclass(frozen=True)
class IndicatorSeries:
    """
    Monatliche Indikatorreihe (Makro- oder Unsicherheitsindikator).

    observations enthält (Monat, Wert); fehlende Werte sind NaN und
    werden nie aufgefüllt.
    """

    name: str
    observations: Tuple[Tuple[pd.Period, float], ...]
    kind: IndicatorKind = IndicatorKind.CONTINUOUS
    frequency: str = "M"

    def __post_init__(self):
        months = [m for m, _ in self.observations]
        if any(b <= a for a, b in zip(months, months[1:])):
            raise FormatError(f"Monate der Reihe {self.name} nicht streng steigend",
                              {"series": self.name})
        if self.kind is IndicatorKind.BINARY:
            values = [v for _, v in self.observations if not np.isnan(v)]
            if any(v not in (0.0, 1.0) for v in values):
                raise FormatError(f"Binäre Reihe {self.name} enthält Werte außerhalb von {{0, 1}}",
                                  {"series": self.name})

    @property
    def gaps(self) -> List[pd.Period]:
        return [m for m, v in self.observations if np.isnan(v)]

    def to_series(self) -> pd.Series:
        """
        Returns:
            pd.Series: Werte mit monatlichem PeriodIndex
        """
        index = pd.PeriodIndex([m for m, _ in self.observations], freq="M")
        return pd.Series([v for _, v in self.observations], index=index, name=self.name, dtype=float)


def _parse_dates(values: pd.Series) -> pd.Series:
    return pd.to_datetime(values, format="%Y-%m-%d", errors="coerce").dt.date


def load_option_chains(path: str, schema: Optional[Mapping[str, str]] = None,
                       default_underlier: Optional[str] = None) -> ChainLoadResult:
    """
    Liest Optionsnotierungen aus einer CSV-Datei und gruppiert sie zu Ketten.

    Zeilen, die die Invarianten einer Notierung verletzen oder nicht
    lesbar sind, werden verworfen und im DropReport nach Grund gezählt.
    Doppelte (Strike, Art)-Einträge innerhalb eines Verfalls werden
    ebenfalls verworfen (der erste Eintrag bleibt).

    Args:
        path: Pfad zur CSV-Datei
        schema: Zuordnung interner Spaltenname -> Spaltenname in der Datei
        default_underlier: Basiswert, falls die Datei keine Spalte dafür hat

    Returns:
        ChainLoadResult: Ketten sortiert nach (Basiswert, Datum) plus DropReport

    Raises:
        SchemaError: Wenn eine Pflichtspalte fehlt
        EmptyInputError: Wenn keine Zeile lesbar ist
    """
    schema = dict(schema or {})
    column_map = {key: schema.get(key, key) for key in REQUIRED_CHAIN_COLUMNS + ("underlier",)}

    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [key for key in REQUIRED_CHAIN_COLUMNS if column_map[key] not in raw.columns]
    if missing:
        raise SchemaError(f"Pflichtspalten fehlen in {path}: {missing}",
                          {"path": str(path), "missing": missing})

    frame = pd.DataFrame({key: raw[column_map[key]] for key in REQUIRED_CHAIN_COLUMNS})
    if column_map["underlier"] in raw.columns:
        frame["underlier"] = raw[column_map["underlier"]].str.strip()
    else:
        frame["underlier"] = default_underlier or "UNDERLIER"

    total_rows = len(frame)
    reasons = Counter()

    # Spalten typisieren; nicht lesbare Zeilen verwerfen
    frame["date"] = _parse_dates(frame["date"])
    frame["expiry"] = _parse_dates(frame["expiry"])
    for column in ("strike", "bid", "ask"):
        frame[column] = pd.to_numeric(frame[column], errors="coerce")
    rights = []
    for value in frame["right"]:
        try:
            rights.append(Right.parse(value))
        except ValueError:
            rights.append(None)
    frame["right"] = rights

    unparseable = (frame[["date", "expiry", "strike", "bid", "ask", "right"]].isna().any(axis=1)
                   | (frame["underlier"] == ""))
    if unparseable.any():
        reasons["unparseable"] = int(unparseable.sum())
    frame = frame.loc[~unparseable]
    if frame.empty:
        raise EmptyInputError(f"Keine lesbaren Zeilen in {path}", {"path": str(path)})

    grouped: Dict[Tuple[str, dt.date, dt.date], Dict[Tuple[Right, float], OptionQuote]] = {}
    for row in frame.itertuples(index=False):
        quote = OptionQuote(strike=float(row.strike), right=row.right, bid=float(row.bid),
                            ask=float(row.ask), expiry=row.expiry, quote_date=row.date)
        reason = quote.violation()
        if reason:
            reasons[reason] += 1
            continue
        bucket = grouped.setdefault((row.underlier, row.date, row.expiry), {})
        key = (quote.right, quote.strike)
        if key in bucket:
            reasons["duplicate"] += 1
            continue
        bucket[key] = quote

    chains = _assemble_chains(grouped)
    kept = sum(chain.n_quotes for chain in chains)
    report = DropReport(total_rows=total_rows, kept_rows=kept, reasons=dict(reasons))
    if report.dropped_rows:
        logger.info(f"{report.dropped_rows} von {total_rows} Optionszeilen verworfen: "
                    f"{report.to_dict()['reasons']}")
    if not chains:
        raise EmptyInputError(f"Keine gültigen Notierungen in {path}", report.to_dict())
    return ChainLoadResult(chains=chains, report=report)


def _assemble_chains(grouped) -> List[OptionChainDay]:
    by_day: Dict[Tuple[str, dt.date], List[ChainSlice]] = {}
    for (underlier, quote_date, expiry) in sorted(grouped):
        quotes = sorted(grouped[(underlier, quote_date, expiry)].values(),
                        key=lambda q: (q.right.value, q.strike))
        by_day.setdefault((underlier, quote_date), []).append(
            ChainSlice(expiry=expiry, quotes=tuple(quotes)))
    return [OptionChainDay(underlier=u, quote_date=d, slices=tuple(s))
            for (u, d), s in sorted(by_day.items())]


def chains_to_frame(chains: Sequence[OptionChainDay]) -> pd.DataFrame:
    """
    Serialisiert Ketten zurück in die Tabellenform der Eingabedatei

    Args:
        chains: Optionsketten

    Returns:
        pd.DataFrame: Spalten date, expiry, strike, right, bid, ask, underlier
    """
    rows = [
        {
            "date": q.quote_date.isoformat(),
            "expiry": q.expiry.isoformat(),
            "strike": q.strike,
            "right": q.right.value,
            "bid": q.bid,
            "ask": q.ask,
            "underlier": chain.underlier,
        }
        for chain in chains for s in chain.slices for q in s.quotes
    ]
    return pd.DataFrame(rows, columns=list(REQUIRED_CHAIN_COLUMNS) + ["underlier"])


def write_option_chains(chains: Sequence[OptionChainDay], path: str) -> None:
    """
    Schreibt Ketten als CSV (verlustfrei für die überlebenden Zeilen)

    Args:
        chains: Optionsketten
        path: Zieldatei
    """
    chains_to_frame(chains).to_csv(path, index=False, float_format="%.10g")


def rate_for(curve: RateCurveDay, days: int) -> float:
    """
    Liefert den Zins für eine Restlaufzeit in Kalendertagen.

    Exakter Treffer, sonst lineare Interpolation zwischen den umgebenden
    Stützstellen, außerhalb der Kurve flache Extrapolation.

    Args:
        curve: Zinskurve des Tages
        days: Restlaufzeit in Tagen (>= 0)

    Returns:
        float: Annualisierter Zins als Dezimalbruch
    """
    tenors = np.array([d for d, _ in curve.tenors], dtype=float)
    rates = np.array([r for _, r in curve.tenors], dtype=float)
    # np.interp extrapoliert an den Rändern flach
    return float(np.interp(float(days), tenors, rates))


def load_rate_curves(path: str) -> Dict[dt.date, RateCurveDay]:
    """
    Liest Zinskurven (date, tenor_days, rate) aus einer CSV-Datei

    Args:
        path: Pfad zur CSV-Datei

    Returns:
        dict: Datum -> RateCurveDay

    Raises:
        SchemaError: Wenn eine Pflichtspalte fehlt
        FormatError: Bei nicht lesbaren Werten oder doppelten Laufzeiten
    """
    frame = pd.read_csv(path)
    missing = [c for c in ("date", "tenor_days", "rate") if c not in frame.columns]
    if missing:
        raise SchemaError(f"Pflichtspalten fehlen in {path}: {missing}",
                          {"path": str(path), "missing": missing})
    frame["date"] = _parse_dates(frame["date"].astype(str))
    if frame[["date", "tenor_days", "rate"]].isna().any().any():
        raise FormatError(f"Nicht lesbare Werte in der Zinsdatei {path}", {"path": str(path)})
    if frame.duplicated(["date", "tenor_days"]).any():
        raise FormatError(f"Doppelte Laufzeiten in der Zinsdatei {path}", {"path": str(path)})

    curves = {}
    for quote_date, group in frame.sort_values(["date", "tenor_days"]).groupby("date", sort=True):
        tenors = tuple((int(d), float(r)) for d, r in zip(group["tenor_days"], group["rate"]))
        curves[quote_date] = RateCurveDay(quote_date=quote_date, tenors=tenors)
    if not curves:
        raise EmptyInputError(f"Keine Zinskurven in {path}", {"path": str(path)})
    return curves


def curve_for_date(curves: Mapping[dt.date, RateCurveDay], quote_date: dt.date) -> RateCurveDay:
    """
    Wählt die Zinskurve eines Tages, sonst die letzte davor

    Raises:
        EmptyInputError: Wenn vor dem Datum keine Kurve existiert
    """
    if quote_date in curves:
        return curves[quote_date]
    earlier = [d for d in curves if d < quote_date]
    if not earlier:
        raise EmptyInputError(f"Keine Zinskurve am oder vor dem {quote_date}",
                              {"date": quote_date.isoformat()})
    return curves[max(earlier)]


def load_market_caps(path: str) -> MarketCapTable:
    """
    Liest durchschnittliche Marktkapitalisierungen (name, avg_mktcap)

    Raises:
        SchemaError: Wenn eine Pflichtspalte fehlt
        FormatError: Bei doppelten Namen oder nicht positiven Werten
    """
    frame = pd.read_csv(path, dtype={"name": str})
    missing = [c for c in ("name", "avg_mktcap") if c not in frame.columns]
    if missing:
        raise SchemaError(f"Pflichtspalten fehlen in {path}: {missing}",
                          {"path": str(path), "missing": missing})
    if frame["name"].duplicated().any():
        raise FormatError(f"Doppelte Namen in {path}", {"path": str(path)})
    caps = pd.to_numeric(frame["avg_mktcap"], errors="coerce")
    if caps.isna().any():
        raise FormatError(f"Nicht lesbare Marktkapitalisierung in {path}", {"path": str(path)})
    return MarketCapTable(entries=dict(zip(frame["name"].str.strip(), caps.astype(float))))


def _parse_month(value: str) -> pd.Period:
    text = str(value).strip()
    for fmt in ("%Y-%m", "%Y-%m-%d"):
        try:
            return pd.Period(dt.datetime.strptime(text, fmt), freq="M")
        except ValueError:
            continue
    raise FormatError(f"Monat nicht lesbar: {value!r}", {"value": text})


def load_indicators(path: str, month_column: str = "month") -> List[IndicatorSeries]:
    """
    Liest monatliche Indikatoren: eine Monatsspalte plus eine Spalte je Reihe.

    Leere Zellen werden als Lücken (NaN) übernommen. Reihen, deren Werte
    ausschließlich 0 und 1 sind, gelten als binär.

    Args:
        path: Pfad zur CSV-Datei
        month_column: Name der Monatsspalte

    Returns:
        list: Eine IndicatorSeries je Datenspalte

    Raises:
        SchemaError: Wenn die Monatsspalte fehlt
        FormatError: Bei nicht lesbaren Monaten oder Werten
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if month_column not in frame.columns:
        raise SchemaError(f"Monatsspalte {month_column!r} fehlt in {path}",
                          {"path": str(path), "missing": [month_column]})
    months = [_parse_month(v) for v in frame[month_column]]

    series = []
    for column in frame.columns:
        if column == month_column:
            continue
        cells = frame[column].str.strip().replace({"": np.nan, "NA": np.nan, "NaN": np.nan})
        values = pd.to_numeric(cells, errors="coerce")
        unreadable = values.isna() & cells.notna()
        if unreadable.any():
            raise FormatError(f"Nicht lesbare Werte in Spalte {column} von {path}",
                              {"path": str(path), "series": column})
        observed = values.dropna()
        kind = (IndicatorKind.BINARY if len(observed) and observed.isin([0.0, 1.0]).all()
                else IndicatorKind.CONTINUOUS)
        indicator = IndicatorSeries(
            name=column,
            observations=tuple(zip(months, values.astype(float).tolist())),
            kind=kind,
        )
        if indicator.gaps:
            logger.info(f"Indikator {column}: {len(indicator.gaps)} Lücke(n)")
        series.append(indicator)
    return series
