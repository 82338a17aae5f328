"""
Rollierende Verbundenheit für fearconnect
Schätzt die Verbundenheitsmaße auf rechtsbündigen rollierenden Fenstern
für alle drei Indexvarianten, bildet das Verhältnis C⁻/C⁺, die kumulierten
Sender/Empfänger-Ranglisten je Zeitraum und die monatlich gerollten
Quartalswerte für die Prognoseregressionen.
"""

import datetime as dt
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from fearconnect.connectedness import gfevd, summarize
from fearconnect.exceptions import (
    EmptyBucketError,
    FearConnectError,
    InsufficientSampleError,
    PanelError,
)
from fearconnect.var_engine import fit_var, is_stable
from fearconnect.vol_index import Flavor
from fearconnect.vol_panel import VolPanel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RollingConfig:
    window: int = 200
    p: int = 4
    H: int = 12
    log_transform: bool = True
    step: int = 1

    def check(self, n_names: int) -> None:
        """
        Raises:
            InsufficientSampleError: Wenn window <= N·p + p + 1
        """
        if self.step < 1:
            raise ValueError("step muss mindestens 1 sein")
        minimum = n_names * self.p + self.p + 1
        if self.window <= minimum:
            raise InsufficientSampleError(
                f"Fensterlänge {self.window} zu kurz für VAR({self.p}) mit {n_names} Namen (> {minimum} nötig)",
                {"window": self.window, "minimum": minimum + 1})


@dataclass
class RollingSeries:
    """
    Rollierende Ergebnisse, datiert auf das Fensterende.

    totals: Spalten je Variante; nets: je Variante eine Datum × Name-Tabelle;
    unstable: Instabilitätsflagge je (Datum, Variante); skipped: verworfene
    Fenster mit Grund.
    """

    dates: Tuple[dt.date, ...]
    names: Tuple[str, ...]
    totals: pd.DataFrame
    nets: Dict[Flavor, pd.DataFrame]
    unstable: pd.DataFrame
    skipped: List[Dict] = field(default_factory=list)

    @property
    def afc(self) -> pd.Series:
        return (self.totals[Flavor.POSITIVE.value] - self.totals[Flavor.NEGATIVE.value]).rename("afc")

    @property
    def ratio(self) -> pd.Series:
        return ratio_series(self)

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class Bucket:
    label: str
    start: dt.date
    end: dt.date


@dataclass(frozen=True)
class RankingReport:
    """
    Kumulierte Sender/Empfänger-Werte je Zeitraum und Name.

    table hat die Spalten bucket, name, T (Summe positiver NET-Werte) und
    R (Summe negativer NET-Werte); top nennt je Zeitraum den größten Sender
    und den größten Empfänger.
    """

    flavor: Flavor
    buckets: Tuple[Bucket, ...]
    table: pd.DataFrame
    top: Dict[str, Tuple[str, str]]


def _check_panels(panels: Mapping[Flavor, VolPanel]) -> VolPanel:
    missing = [f.value for f in Flavor if f not in panels]
    if missing:
        raise PanelError(f"Fehlende Panelvarianten: {', '.join(missing)}", {"missing": missing})
    reference = panels[Flavor.AGGREGATE]
    for flavor, panel in panels.items():
        if panel.dates != reference.dates or panel.names != reference.names:
            raise PanelError(f"Achsen des Panels {flavor.value} weichen ab", {"flavor": flavor.value})
    if reference.n_names < 2:
        raise PanelError("Verbundenheit ist für einen einzelnen Namen nicht definiert",
                         {"names": list(reference.names)})
    return reference


def _window_task(blocks: Sequence[np.ndarray], cfg: RollingConfig):
    """
    Worker: Gesamtindex, NET-Vektor und Stabilität aller drei Varianten eines Fensters.

    Schlägt eine Variante fehl, wird das ganze Fenster verworfen.
    """
    totals, nets, unstable = [], [], []
    try:
        for flavor, block in zip(Flavor, blocks):
            model = fit_var(block, cfg.p, cfg.log_transform)
            stable, _ = is_stable(model)
            summary = summarize(gfevd(model, cfg.H), flavor)
            totals.append(summary.total)
            nets.append(summary.net)
            unstable.append(not stable)
    except FearConnectError as e:
        return None, e.to_record()
    return (np.array(totals), np.vstack(nets), np.array(unstable)), None


def _run_windows(panels: Mapping[Flavor, VolPanel], ends: Sequence[int], cfg: RollingConfig,
                 n_jobs: Optional[int], progress: bool):
    arrays = [panels[f].values for f in Flavor]
    jobs = (delayed(_window_task)([a[end - cfg.window + 1:end + 1] for a in arrays], cfg) for end in ends)
    if progress and n_jobs == 1:
        jobs = tqdm(jobs, total=len(ends), desc="Rollierende Fenster")
    return Parallel(n_jobs=n_jobs)(jobs)


def _assemble(reference: VolPanel, ends: Sequence[int], outputs) -> RollingSeries:
    dates, totals, nets, unstable, skipped = [], [], [], [], []
    for end, (result, record) in zip(ends, outputs):
        date = reference.dates[end]
        if result is None:
            skipped.append({"date": date.isoformat(), **record})
            continue
        dates.append(date)
        totals.append(result[0])
        nets.append(result[1])
        unstable.append(result[2])

    if skipped:
        logger.warning(f"{len(skipped)} Fenster verworfen")
    index = pd.Index(dates, name="date")
    columns = [f.value for f in Flavor]
    names = list(reference.names)
    total_frame = pd.DataFrame(np.array(totals).reshape(len(dates), len(Flavor)), index=index, columns=columns)
    unstable_frame = pd.DataFrame(np.array(unstable, dtype=bool).reshape(len(dates), len(Flavor)),
                                  index=index, columns=columns)
    net_stack = np.array(nets).reshape(len(dates), len(Flavor), len(names))
    net_frames = {f: pd.DataFrame(net_stack[:, k, :], index=index, columns=names) for k, f in enumerate(Flavor)}
    n_unstable = int(unstable_frame.to_numpy().sum())
    if n_unstable:
        logger.info(f"{n_unstable} instabile (Fenster, Variante)-Schätzungen markiert")
    return RollingSeries(dates=tuple(dates), names=tuple(names), totals=total_frame, nets=net_frames,
                         unstable=unstable_frame, skipped=skipped)


def rolling_connectedness(panels: Mapping[Flavor, VolPanel], cfg: RollingConfig = RollingConfig(),
                          n_jobs: Optional[int] = 1, progress: bool = False) -> RollingSeries:
    """
    Verbundenheit auf rechtsbündigen Fenstern aller drei Varianten.

    Die Fenster sind unabhängig und werden mit joblib verteilt; die
    Ergebnisse werden in Datumsreihenfolge zusammengesetzt, serielle und
    parallele Läufe sind daher identisch.

    Args:
        panels: {Flavor: VolPanel} mit gemeinsamen Achsen
        cfg: Fensterlänge, Lag-Ordnung, Horizont, Log-Transformation, Schrittweite
        n_jobs: Anzahl paralleler Prozesse, -1 für alle Kerne
        progress: Fortschrittsbalken (nur seriell)

    Returns:
        RollingSeries

    Raises:
        InsufficientSampleError: Fenster länger als die Stichprobe oder zu kurz für das VAR
    """
    reference = _check_panels(panels)
    cfg.check(reference.n_names)
    if cfg.window > reference.n_obs:
        raise InsufficientSampleError(
            f"Fensterlänge {cfg.window} übersteigt die Stichprobe von {reference.n_obs} Tagen",
            {"window": cfg.window, "n_obs": reference.n_obs})
    ends = list(range(cfg.window - 1, reference.n_obs, cfg.step))
    logger.info(f"Rollierende Schätzung über {len(ends)} Fenster (window={cfg.window}, p={cfg.p}, H={cfg.H})")
    return _assemble(reference, ends, _run_windows(panels, ends, cfg, n_jobs, progress))


def ratio_series(rolling: RollingSeries) -> pd.Series:
    """C⁻/C⁺ je Fensterende; Punkte mit C⁺ = 0 sind Lücken (NaN)."""
    pos = rolling.totals[Flavor.POSITIVE.value]
    neg = rolling.totals[Flavor.NEGATIVE.value]
    ratio = neg / pos.where(pos != 0)
    return ratio.rename("ratio")


def cumulative_ranking(rolling: RollingSeries, buckets: Sequence[Bucket],
                       flavor: Flavor = Flavor.AGGREGATE) -> RankingReport:
    """
    Kumulierte Sender (T) und Empfänger (R) je Zeitraum.

    T = Σ max(net_t, 0), R = Σ min(net_t, 0) über alle Fensterenden im Zeitraum.

    Raises:
        EmptyBucketError: Zeitraum ohne Fensterende
    """
    nets = rolling.nets[flavor]
    dates = np.array(rolling.dates, dtype=object)
    rows, top = [], {}
    for bucket in buckets:
        mask = (dates >= bucket.start) & (dates <= bucket.end)
        if not mask.any():
            raise EmptyBucketError(f"Zeitraum {bucket.label} enthält keine Fensterenden",
                                   {"bucket": bucket.label, "start": bucket.start.isoformat(),
                                    "end": bucket.end.isoformat()})
        block = nets.to_numpy()[mask]
        transmit = np.clip(block, 0, None).sum(axis=0)
        receive = np.clip(block, None, 0).sum(axis=0)
        for name, t_value, r_value in zip(rolling.names, transmit, receive):
            rows.append({"bucket": bucket.label, "name": name, "T": t_value, "R": r_value})
        top[bucket.label] = (rolling.names[int(np.argmax(transmit))], rolling.names[int(np.argmin(receive))])
    table = pd.DataFrame(rows, columns=["bucket", "name", "T", "R"])
    return RankingReport(flavor=flavor, buckets=tuple(buckets), table=table, top=top)


def default_buckets(dates: Sequence[dt.date], crisis_start: dt.date, crisis_end: dt.date) -> List[Bucket]:
    """
    Standardzeiträume: Kalenderjahre, Zweijahresblöcke, vor, während und
    nach der Krise sowie die volle Stichprobe. Zeiträume ohne Daten
    entfallen.
    """
    if not dates:
        return []
    first, last = min(dates), max(dates)
    years = sorted({d.year for d in dates})
    buckets = [Bucket(str(y), dt.date(y, 1, 1), dt.date(y, 12, 31)) for y in years]
    for y in years[::2]:
        buckets.append(Bucket(f"{y}-{y + 1}", dt.date(y, 1, 1), dt.date(y + 1, 12, 31)))
    buckets.extend([
        Bucket("pre-crisis", first, crisis_start - dt.timedelta(days=1)),
        Bucket("crisis", crisis_start, crisis_end),
        Bucket("post-crisis", crisis_end + dt.timedelta(days=1), last),
        Bucket("full", first, last),
    ])
    return [b for b in buckets if b.start <= b.end and any(b.start <= d <= b.end for d in dates)]


def month_end_positions(dates: Sequence[dt.date]) -> List[int]:
    """Zeilenpositionen des letzten Handelstags je Kalendermonat."""
    positions = []
    for i, d in enumerate(dates):
        if i + 1 == len(dates) or (dates[i + 1].year, dates[i + 1].month) != (d.year, d.month):
            positions.append(i)
    return positions


def _monthly_frame(dates: Sequence[dt.date], totals: pd.DataFrame) -> pd.DataFrame:
    index = pd.PeriodIndex([pd.Period(d, freq="M") for d in dates], name="month")
    return pd.DataFrame(totals.to_numpy(), index=index, columns=totals.columns)


def quarterly_index(panels: Union[Mapping[Flavor, VolPanel], VolPanel],
                    cfg: RollingConfig = RollingConfig(window=60),
                    n_jobs: Optional[int] = 1) -> Tuple[pd.DataFrame, List[Dict]]:
    """
    Quartalsverbundenheit, monatlich gerollt.

    Für jedes Monatsende wird die Verbundenheit aus den letzten window
    Handelstagen (Standard 60) geschätzt. Monate mit kürzerer Historie
    werden übersprungen und gemeldet.

    Args:
        panels: {Flavor: VolPanel} oder ein einzelnes Panel (wird für alle
            Varianten verwendet)
        cfg: Fenster- und VAR-Einstellungen
        n_jobs: Anzahl paralleler Prozesse

    Returns:
        tuple: (DataFrame Monat × Variante, Liste übersprungener Monate)

    Raises:
        PanelError: Bei nur einem Namen
    """
    if isinstance(panels, VolPanel):
        panels = {flavor: VolPanel(panels.dates, panels.names, panels.values, flavor) for flavor in Flavor}
    reference = _check_panels(panels)
    cfg.check(reference.n_names)

    ends, skipped = [], []
    for pos in month_end_positions(reference.dates):
        if pos + 1 < cfg.window:
            skipped.append({"month": str(pd.Period(reference.dates[pos], freq="M")),
                            "error": "insufficient_history", "available": pos + 1})
        else:
            ends.append(pos)
    if skipped:
        logger.info(f"{len(skipped)} Monate mit weniger als {cfg.window} Handelstagen übersprungen")

    series = _assemble(reference, ends, _run_windows(panels, ends, cfg, n_jobs, False))
    for record in series.skipped:
        skipped.append({"month": str(pd.Period(dt.date.fromisoformat(record["date"]), freq="M")),
                        "error": record["error"], "message": record["message"]})
    return _monthly_frame(series.dates, series.totals), skipped


def monthly_from_rolling(rolling: RollingSeries) -> pd.DataFrame:
    """Rollierende Gesamtindizes, abgetastet am letzten Fensterende je Monat."""
    positions = month_end_positions(rolling.dates)
    return _monthly_frame([rolling.dates[i] for i in positions], rolling.totals.iloc[positions])
