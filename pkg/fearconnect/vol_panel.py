"""
Indexpanels für fearconnect
Baut aus den Optionsketten aller Basiswerte die drei dichten Tagespanels
(aggregiert, positiv, negativ), den marktkapitalisierungsgewichteten
Sektorindex und die deskriptiven Statistiken je Basiswert.
"""

import datetime as dt
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from fearconnect.exceptions import FearConnectError, MissingCapError, PanelError
from fearconnect.market_data import MarketCapTable, OptionChainDay, RateCurveDay, curve_for_date
from fearconnect.vol_index import Flavor, day_indexes

logger = logging.getLogger(__name__)

GAP_POLICIES = ("drop", "error")


@dataclass(frozen=True)
class VolPanel:
    """Dichte Datum × Name-Matrix einer Indexvariante."""

    dates: Tuple[dt.date, ...]
    names: Tuple[str, ...]
    values: np.ndarray
    flavor: Flavor

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.dates), len(self.names)):
            raise PanelError(
                f"Panelform {values.shape} passt nicht zu {len(self.dates)} Daten × {len(self.names)} Namen")
        if np.isnan(values).any():
            raise PanelError("Panel enthält NaN-Werte", {"flavor": self.flavor.value})
        if (values < 0).any():
            raise PanelError("Panel enthält negative Indexwerte", {"flavor": self.flavor.value})
        if len(set(self.names)) != len(self.names):
            raise PanelError("Doppelte Namen im Panel", {"names": list(self.names)})
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise PanelError("Datumsachse muss streng steigen")
        object.__setattr__(self, "values", values)

    @property
    def n_obs(self) -> int:
        return len(self.dates)

    @property
    def n_names(self) -> int:
        return len(self.names)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, index=pd.Index(self.dates, name="date"), columns=list(self.names))
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, flavor: Flavor) -> "VolPanel":
        dates = tuple(pd.Timestamp(d).date() for d in frame.index)
        return cls(dates=dates, names=tuple(str(c) for c in frame.columns),
                   values=frame.to_numpy(dtype=float), flavor=flavor)

    def rows(self, start: int, stop: int) -> "VolPanel":
        """Teilpanel der Zeilen start..stop-1."""
        return VolPanel(self.dates[start:stop], self.names, self.values[start:stop], self.flavor)

    def reorder(self, names: Sequence[str]) -> "VolPanel":
        idx = [self.names.index(n) for n in names]
        return VolPanel(self.dates, tuple(names), self.values[:, idx], self.flavor)


@dataclass
class GapReport:
    """Protokoll aller aufgefüllten oder verworfenen (Name, Datum)-Paare."""

    carried_forward: List[Dict[str, str]] = field(default_factory=list)
    dropped_dates: List[str] = field(default_factory=list)
    failures: Counter = field(default_factory=Counter)
    n_dates: int = 0

    @property
    def n_filled(self) -> int:
        return len(self.carried_forward)

    def to_dict(self) -> Dict:
        return {
            "n_dates": self.n_dates,
            "n_filled": self.n_filled,
            "carried_forward": self.carried_forward,
            "dropped_leading_dates": self.dropped_dates,
            "failures": dict(sorted(self.failures.items())),
        }


def _index_task(chain: OptionChainDay, curve: RateCurveDay, target_days: int, min_days: int):
    """Worker: Indexwerte eines (Name, Datum) oder ein Fehler-Record."""
    try:
        day = day_indexes(chain, curve, target_days, min_days)
        return tuple(day.values[f] for f in Flavor), None
    except FearConnectError as e:
        return None, e.to_record()


def build_panels(chains: Iterable[OptionChainDay], curves: Mapping[dt.date, RateCurveDay],
                 target_days: int = 30, min_days: int = 7, gap_policy: str = "drop",
                 n_jobs: Optional[int] = 1) -> Tuple[Dict[Flavor, VolPanel], GapReport]:
    """
    Berechnet alle drei Indexvarianten für alle Basiswerte und Handelstage.

    Ein (Name, Datum) ohne berechenbaren Index gilt in allen drei Varianten
    als Lücke und wird mit dem Vortageswert aufgefüllt. Lücken vor dem
    ersten berechenbaren Tag eines Namens werden je nach gap_policy
    verworfen (die Panels beginnen am ersten vollständigen Tag) oder als
    Fehler gemeldet.

    Args:
        chains: Optionsketten aller Basiswerte
        curves: Zinskurven je Datum
        target_days: Zielhorizont des Index
        min_days: Mindestrestlaufzeit eines Verfalls
        gap_policy: "drop" oder "error"
        n_jobs: Anzahl paralleler Prozesse (joblib), -1 für alle Kerne

    Returns:
        tuple: ({Flavor: VolPanel}, GapReport)

    Raises:
        PanelError: Name ohne berechenbaren Tag oder führende Lücke bei gap_policy "error"
    """
    if gap_policy not in GAP_POLICIES:
        raise PanelError(f"Unbekannte gap_policy '{gap_policy}'", {"allowed": list(GAP_POLICIES)})

    by_name: Dict[str, Dict[dt.date, OptionChainDay]] = defaultdict(dict)
    for chain in chains:
        by_name[chain.underlier][chain.quote_date] = chain
    if not by_name:
        raise PanelError("Keine Optionsketten für den Panelaufbau")
    names = sorted(by_name)
    dates = sorted({d for per_name in by_name.values() for d in per_name})

    day_curves = {}
    for d in dates:
        try:
            day_curves[d] = (curve_for_date(curves, d), None)
        except FearConnectError as e:
            day_curves[d] = (None, e.to_record())

    tasks = [(name, d) for name in names for d in dates if d in by_name[name]]
    runnable = [(name, d) for name, d in tasks if day_curves[d][0] is not None]
    logger.info(f"Berechne Indizes für {len(runnable)} (Name, Datum)-Paare, n_jobs={n_jobs}")
    computed = Parallel(n_jobs=n_jobs)(
        delayed(_index_task)(by_name[name][d], day_curves[d][0], target_days, min_days)
        for name, d in runnable
    )
    results = dict(zip(runnable, computed))
    outputs = [results.get(task, (None, day_curves[task[1]][1])) for task in tasks]

    report = GapReport()
    raw = np.full((len(dates), len(names), len(Flavor)), np.nan)
    reasons: Dict[Tuple[int, int], str] = {}
    date_pos = {d: i for i, d in enumerate(dates)}
    for (name, d), (values, record) in zip(tasks, outputs):
        j = names.index(name)
        if values is None:
            report.failures[record["error"]] += 1
            reasons[(date_pos[d], j)] = record["error"]
            logger.debug(f"Kein Index für {name} am {d}: {record['message']}")
        else:
            raw[date_pos[d], j, :] = values

    available = ~np.isnan(raw[:, :, 0])
    for j, name in enumerate(names):
        if not available[:, j].any():
            raise PanelError(f"Für {name} ist an keinem Tag ein Index berechenbar",
                             {"name": name, "failures": dict(report.failures)})

    first_rows = [int(np.argmax(available[:, j])) for j in range(len(names))]
    start = max(first_rows)
    if start > 0:
        if gap_policy == "error":
            late = [names[j] for j, r in enumerate(first_rows) if r > 0]
            raise PanelError(f"Führende Lücken für {', '.join(late)}",
                             {"names": late, "first_date": dates[start].isoformat()})
        report.dropped_dates = [d.isoformat() for d in dates[:start]]
        logger.warning(f"{start} führende Handelstage ohne vollständige Indizes verworfen")

    filled = raw[start:]
    for i in range(1, filled.shape[0]):
        for j in range(len(names)):
            if np.isnan(filled[i, j, 0]):
                filled[i, j, :] = filled[i - 1, j, :]
                row = start + i
                report.carried_forward.append({
                    "name": names[j], "date": dates[row].isoformat(),
                    "reason": reasons.get((row, j), "missing_chain"),
                })
    report.n_dates = filled.shape[0]
    if report.n_filled:
        logger.warning(f"{report.n_filled} Lücken mit dem Vortageswert aufgefüllt")

    panel_dates = tuple(dates[start:])
    panels = {
        flavor: VolPanel(panel_dates, tuple(names), filled[:, :, k].copy(), flavor)
        for k, flavor in enumerate(Flavor)
    }
    return panels, report


def build_panel(chains: Iterable[OptionChainDay], curves: Mapping[dt.date, RateCurveDay],
                flavor: Flavor, **kwargs) -> VolPanel:
    """Panel einer einzelnen Indexvariante (siehe build_panels)."""
    panels, _ = build_panels(chains, curves, **kwargs)
    return panels[flavor]


def sector_weights(names: Sequence[str], caps: MarketCapTable) -> np.ndarray:
    """
    Gewichte w_j = cap_j / Σ cap über die Namen des Panels.

    Raises:
        MissingCapError: Wenn für einen Namen keine Marktkapitalisierung vorliegt
    """
    missing = [n for n in names if n not in caps.entries]
    if missing:
        raise MissingCapError(f"Keine Marktkapitalisierung für {', '.join(missing)}",
                              {"names": missing})
    caps_vec = np.array([caps.entries[n] for n in names], dtype=float)
    return caps_vec / caps_vec.sum()


def sector_index(panel: VolPanel, caps: MarketCapTable) -> pd.Series:
    """
    Marktkapitalisierungsgewichteter Sektorindex WVIX_t = Σ_j w_j VIX_{j,t}.

    Args:
        panel: Panel einer Indexvariante
        caps: Durchschnittliche Marktkapitalisierungen

    Returns:
        pd.Series: Sektorindex, indiziert nach Datum
    """
    weights = sector_weights(panel.names, caps)
    name = {Flavor.AGGREGATE: "WVIX", Flavor.POSITIVE: "WVIX+", Flavor.NEGATIVE: "WVIX-"}[panel.flavor]
    return pd.Series(panel.values @ weights, index=pd.Index(panel.dates, name="date"), name=name)


def describe_panel(panel: VolPanel) -> pd.DataFrame:
    """
    Deskriptive Statistiken je Name: Mittelwert, Median, Maximum, Minimum,
    Standardabweichung, Schiefe und Kurtosis (nicht exzessbereinigt).
    """
    values = panel.values
    frame = pd.DataFrame({
        "mean": values.mean(axis=0),
        "median": np.median(values, axis=0),
        "max": values.max(axis=0),
        "min": values.min(axis=0),
        "std": values.std(axis=0, ddof=1) if panel.n_obs > 1 else np.zeros(panel.n_names),
        "skewness": stats.skew(values, axis=0),
        "kurtosis": stats.kurtosis(values, axis=0, fisher=False),
    }, index=pd.Index(panel.names, name="name"))
    return frame
